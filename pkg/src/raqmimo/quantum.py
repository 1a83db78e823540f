"""Steady state of the driven four-level ladder and the vapor susceptibility.

The receiver's vapor cell is modeled as a four-level ladder (ground,
probe-excited, coupling-excited, RF-coupled top level) driven by three
fields: an optical probe, an optical coupling beam, and the RF field
under measurement.  The density matrix evolves under a master equation
with a coherent part, diagonal relaxation, and a repopulation term; its
steady state determines the complex susceptibility seen by the probe,
and the derivative of that susceptibility with respect to the RF Rabi
frequency sets the receiver's small-signal gain.

All rates, Rabi frequencies, and detunings are angular (rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import EPS0, HBAR, TWO_PI
from .errors import DomainViolation, NonPhysical, SingularSystem, ZeroProbe

__all__ = [
    "AtomicConfig",
    "DensityMatrix",
    "build_hamiltonian",
    "decay_rates",
    "steady_state",
    "lindblad_residual",
    "susceptibility",
    "susceptibility_derivative",
]

# Max-norm of the (normalized) master-equation right-hand side accepted as a
# converged steady state; observed floor is ~1e-15 for well-posed configs.
_RESIDUAL_TOL = 1e-10
# Condition number of the trace-constrained linear system above which the
# steady state is treated as non-unique.
_COND_LIMIT = 1e12
# Most negative population accepted as roundoff before declaring the result
# unphysical.
_DIAG_FLOOR = -1e-8
# Relative agreement between successive Richardson extrapolations at which
# the adaptive derivative stops.
_DERIV_RTOL = 1e-8


@dataclass(frozen=True)
class AtomicConfig:
    """Drive strengths, detunings, and relaxation rates of the vapor cell.

    Parameters
    ----------
    omega_p, omega_c : float
        Probe and coupling Rabi frequencies [rad/s], identical across
        sensors.
    delta_p, delta_c, delta_l : float
        Detunings of the probe and coupling beams and of the RF local
        oscillator from their respective transitions [rad/s].
    gamma2, gamma3, gamma4 : float
        Population decay rates of the three excited levels [rad/s].  The
        defaults keep only ``gamma2`` nonzero, which is the standard
        ladder-EIT operating point.
    gamma : float
        Transit relaxation rate (atoms entering/leaving the beam) [rad/s].
    gamma_c : float
        Collisional loss rate of the coupling-excited level [rad/s].
    n0 : float
        Atomic number density [atoms/m^3].  The default is a calibration
        value chosen so the default cell is optically thin enough to
        transmit the probe; real cells vary by orders of magnitude.
    mu12, mu34 : float
        Dipole moments of the probe transition and of the RF transition
        [C m].
    upsilon : float
        Participation fraction: the share of atoms contributing to the
        effective density used by the sensitivity budget (not by the
        susceptibility, which sees the full density).
    gamma2_total : float or None
        Total dephasing rate of the probe coherence [rad/s] used by the
        sensitivity budget; ``None`` selects the radiative value
        ``gamma2 / 2``.
    """

    omega_p: float = TWO_PI * 5.7e6
    omega_c: float = TWO_PI * 0.97e6
    delta_p: float = 0.0
    delta_c: float = 0.0
    delta_l: float = 0.0
    gamma2: float = TWO_PI * 5.2e6
    gamma3: float = 0.0
    gamma4: float = 0.0
    gamma: float = 0.0
    gamma_c: float = 0.0
    n0: float = 4.89e14
    mu12: float = 2.54e-29
    mu34: float = 1.2e-26
    upsilon: float = 0.01
    gamma2_total: float | None = None

    def __post_init__(self) -> None:
        for name in ("omega_p", "omega_c", "gamma2", "gamma3", "gamma4", "gamma", "gamma_c"):
            if getattr(self, name) < 0.0:
                raise DomainViolation(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("n0", "mu12", "mu34"):
            if getattr(self, name) <= 0.0:
                raise DomainViolation(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.upsilon <= 1.0:
            raise DomainViolation(f"upsilon must be in (0, 1], got {self.upsilon}")
        if self.gamma2_total is not None and self.gamma2_total <= 0.0:
            raise DomainViolation(f"gamma2_total must be positive, got {self.gamma2_total}")

    @property
    def varsigma(self) -> float:
        """Susceptibility prefactor 2 n0 mu12^2 / (eps0 hbar) [dimensionless/coherence]."""
        return 2.0 * self.n0 * self.mu12**2 / (EPS0 * HBAR)

    @property
    def dephasing_rate(self) -> float:
        """Total probe-coherence dephasing rate [rad/s] for the sensitivity budget."""
        if self.gamma2_total is not None:
            return self.gamma2_total
        return 0.5 * self.gamma2

    @property
    def effective_density(self) -> float:
        """Participating atomic density upsilon * n0 [atoms/m^3]."""
        return self.upsilon * self.n0


@dataclass(frozen=True)
class DensityMatrix:
    """Steady-state density matrix with its solver residual.

    Attributes
    ----------
    rho : numpy.ndarray
        4x4 complex Hermitian matrix, unit trace.
    residual : float
        Max-norm of the master-equation right-hand side at ``rho``, in
        units normalized by the largest drive/rate magnitude.
    """

    rho: np.ndarray
    residual: float

    @property
    def populations(self) -> np.ndarray:
        """Real diagonal of the density matrix."""
        return self.rho.diagonal().real.copy()

    @property
    def probe_coherence(self) -> complex:
        """Coherence between the probe-excited level and the ground level."""
        return complex(self.rho[1, 0])


def build_hamiltonian(cfg: AtomicConfig, omega_rf: float) -> np.ndarray:
    """Assemble the 4x4 rotating-frame Hamiltonian (units of rad/s).

    The matrix is real symmetric: nearest-neighbor couplings are half the
    respective Rabi frequencies and the diagonal accumulates detunings.
    """
    if omega_rf < 0.0:
        raise DomainViolation(f"omega_rf must be non-negative, got {omega_rf}")
    h = np.zeros((4, 4))
    h[0, 1] = h[1, 0] = 0.5 * cfg.omega_p
    h[1, 2] = h[2, 1] = 0.5 * cfg.omega_c
    h[2, 3] = h[3, 2] = 0.5 * omega_rf
    h[1, 1] = cfg.delta_p
    h[2, 2] = cfg.delta_p + cfg.delta_c
    h[3, 3] = cfg.delta_p + cfg.delta_c + cfg.delta_l
    return h


def decay_rates(cfg: AtomicConfig) -> np.ndarray:
    """Diagonal of the relaxation matrix (one total width per level)."""
    return np.array(
        [
            cfg.gamma,
            cfg.gamma + cfg.gamma2,
            cfg.gamma + cfg.gamma3 + cfg.gamma_c,
            cfg.gamma + cfg.gamma4,
        ]
    )


def _generator(
    cfg: AtomicConfig, omega_rf: float, scale: float, levels: int = 4
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized master-equation generator: d vec(rho)/dt = A vec(rho) + b.

    Row-major vectorization of the leading ``levels``-dimensional block;
    all rates divided by ``scale`` so the system is dimensionless.  The
    affine part ``b`` comes from the constant ground-state repopulation
    term.
    """
    inv = 1.0 / scale
    h = build_hamiltonian(cfg, omega_rf)[:levels, :levels] * inv
    gam = decay_rates(cfg)[:levels] * inv
    eye = np.eye(levels)
    gam_mat = np.diag(gam)
    a = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    a = a - 0.5 * (np.kron(gam_mat, eye) + np.kron(eye, gam_mat))
    a = np.asarray(a, dtype=complex)

    def idx(i: int, j: int) -> int:
        return levels * i + j

    # Repopulation: level 2 decays into the ground state, the top level
    # decays into the ground state, and the coupling-excited level decays
    # into the probe-excited level.
    if levels >= 2:
        a[idx(0, 0), idx(1, 1)] += cfg.gamma2 * inv
    if levels >= 4:
        a[idx(0, 0), idx(3, 3)] += cfg.gamma4 * inv
    if levels >= 3:
        a[idx(1, 1), idx(2, 2)] += cfg.gamma3 * inv
    b = np.zeros(levels * levels, dtype=complex)
    b[idx(0, 0)] = cfg.gamma * inv
    return a, b


def _reachable_levels(cfg: AtomicConfig, omega_rf: float) -> int:
    """Number of ladder levels reachable from the ground state.

    Population climbs the ladder only through nonzero couplings, so a
    level above the first switched-off drive stays empty forever.  When
    such a level also has no width the full generator is exactly
    rank-deficient; solving on the reachable block gives the same state
    the time evolution from the ground state reaches.
    """
    if cfg.omega_p == 0.0:
        return 1
    if cfg.omega_c == 0.0:
        return 2
    if omega_rf == 0.0:
        return 3
    return 4


def _rate_scale(cfg: AtomicConfig, omega_rf: float) -> float:
    """Largest magnitude among drives, detunings, and rates (normalization)."""
    return max(
        cfg.omega_p,
        cfg.omega_c,
        omega_rf,
        abs(cfg.delta_p),
        abs(cfg.delta_c),
        abs(cfg.delta_l),
        cfg.gamma,
        cfg.gamma_c,
        cfg.gamma2,
        cfg.gamma3,
        cfg.gamma4,
    )


def steady_state(cfg: AtomicConfig, omega_rf: float) -> DensityMatrix:
    """Solve the master equation for its unit-trace steady state.

    The generator is linear in the density-matrix entries, so the steady
    state solves a 16x16 linear system; one redundant row is replaced by
    the trace constraint.  Requires at least one dissipation channel
    reaching the ground state (``gamma2`` or ``gamma``), otherwise the
    steady state is not unique.

    Raises
    ------
    SingularSystem
        If the constrained system is rank-deficient or the returned state
        does not actually zero the master equation (no unit-trace steady
        state exists, e.g. pure collisional loss with no refill).
    NonPhysical
        If a population is negative beyond roundoff.
    """
    if cfg.gamma2 == 0.0 and cfg.gamma == 0.0:
        raise SingularSystem("need gamma2 > 0 or gamma > 0 for a unique steady state")
    scale = _rate_scale(cfg, omega_rf)
    if scale == 0.0:
        raise SingularSystem("all drives, detunings, and rates are zero")
    levels = _reachable_levels(cfg, omega_rf)
    a, b = _generator(cfg, omega_rf, scale, levels)

    system = a.copy()
    rhs = -b
    trace_indices = [i * levels + i for i in range(levels)]
    system[0, :] = 0.0
    system[0, trace_indices] = 1.0
    rhs = rhs.copy()
    rhs[0] = 1.0

    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularSystem(f"steady-state system condition number {cond:.3e} exceeds {_COND_LIMIT:.0e}")
    vec = np.linalg.solve(system, rhs)

    block = vec.reshape(levels, levels)
    rho = np.zeros((4, 4), dtype=complex)
    rho[:levels, :levels] = block
    rho = 0.5 * (rho + rho.conj().T)
    a_full, b_full = _generator(cfg, omega_rf, scale, 4)
    residual = float(np.max(np.abs(a_full @ rho.reshape(16) + b_full)))
    if residual > _RESIDUAL_TOL:
        raise SingularSystem(
            f"no unit-trace steady state: normalized residual {residual:.3e} exceeds {_RESIDUAL_TOL:.0e}"
        )
    populations = rho.diagonal().real
    if populations.min() < _DIAG_FLOOR:
        raise NonPhysical(f"negative population {populations.min():.3e} in steady state")
    return DensityMatrix(rho=rho, residual=residual)


def lindblad_residual(cfg: AtomicConfig, omega_rf: float, rho: np.ndarray) -> float:
    """Max-norm of the normalized master-equation right-hand side at ``rho``."""
    scale = _rate_scale(cfg, omega_rf)
    if scale == 0.0:
        raise SingularSystem("all drives, detunings, and rates are zero")
    a, b = _generator(cfg, omega_rf, scale)
    return float(np.max(np.abs(a @ np.asarray(rho, dtype=complex).reshape(16) + b)))


def susceptibility(cfg: AtomicConfig, omega_rf: float) -> complex:
    """Complex susceptibility of the vapor at the given RF Rabi frequency.

    Proportional to the steady-state probe coherence, normalized by the
    probe Rabi frequency; the imaginary part is probe absorption and the
    real part is probe phase shift.
    """
    if cfg.omega_p == 0.0:
        raise ZeroProbe("susceptibility is undefined for a zero probe drive")
    state = steady_state(cfg, omega_rf)
    return -cfg.varsigma * state.probe_coherence / cfg.omega_p


def susceptibility_derivative(cfg: AtomicConfig, omega_l: float) -> complex:
    """Derivative of the susceptibility with respect to the RF Rabi frequency.

    Evaluated at ``omega_l`` by adaptive central differences with
    Richardson extrapolation; the step is halved until two successive
    extrapolations agree to ~1e-8 relative, comfortably inside the 1e-6
    accuracy contract.
    """
    if cfg.omega_p == 0.0:
        raise ZeroProbe("susceptibility is undefined for a zero probe drive")
    if omega_l <= 0.0:
        raise DomainViolation(f"omega_l must be positive, got {omega_l}")

    def central(h: float) -> complex:
        hi = susceptibility(cfg, omega_l + h)
        lo = susceptibility(cfg, omega_l - h)
        return (hi - lo) / (2.0 * h)

    step = 1e-4 * omega_l
    floor = 1e-7 * omega_l
    d_prev = central(step)
    best: complex | None = None
    while step > floor:
        step *= 0.5
        d_cur = central(step)
        richardson = (4.0 * d_cur - d_prev) / 3.0
        if best is not None:
            diff = abs(richardson - best)
            if diff <= _DERIV_RTOL * max(abs(richardson), abs(best)) or diff == 0.0:
                return richardson
        best = richardson
        d_prev = d_cur
    if best is None:  # pragma: no cover - floor below the first halving
        return d_prev
    return best
