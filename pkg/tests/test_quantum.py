"""Tests for the four-level steady state and the susceptibility.

The steady-state solver is checked two independent ways: against a dense
time-propagation oracle (matrix exponential of the vectorized generator,
integrated until the flow stops moving) and, in the weak-probe limit,
against the textbook continued-fraction form of the probe coherence.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg

from raqmimo.constants import TWO_PI
from raqmimo.errors import DomainViolation, SingularSystem, ZeroProbe
from raqmimo.quantum import (
    AtomicConfig,
    build_hamiltonian,
    decay_rates,
    lindblad_residual,
    steady_state,
    susceptibility,
    susceptibility_derivative,
)

# Default-like operating point used by several tests.
BASE = AtomicConfig()


def _random_config(rng: np.random.Generator) -> tuple[AtomicConfig, float]:
    """Draw a well-posed configuration with mixed detunings and rates."""
    cfg = AtomicConfig(
        omega_p=rng.uniform(1e4, 2e7),
        omega_c=rng.uniform(1e4, 2e7),
        delta_p=rng.uniform(-2e7, 2e7),
        delta_c=rng.uniform(-2e7, 2e7),
        delta_l=rng.uniform(-2e7, 2e7),
        gamma2=rng.uniform(1e5, 5e7),
        gamma3=rng.uniform(0.0, 1e6) if rng.random() < 0.3 else 0.0,
        gamma4=rng.uniform(0.0, 1e6) if rng.random() < 0.3 else 0.0,
        gamma=rng.uniform(0.0, 1e5) if rng.random() < 0.3 else 0.0,
    )
    omega_rf = rng.uniform(0.0, 2e7)
    return cfg, omega_rf


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------


def test_hamiltonian_all_couplings_off_is_zero():
    cfg = AtomicConfig(omega_p=0.0, omega_c=0.0)
    h = build_hamiltonian(cfg, 0.0)
    assert np.all(h == 0.0)


def test_hamiltonian_diagonal_accumulates_detunings():
    cfg = AtomicConfig(delta_p=1.0, delta_c=2.0, delta_l=3.0)
    h = build_hamiltonian(cfg, 0.0)
    np.testing.assert_allclose(np.diag(h), [0.0, 1.0, 3.0, 6.0], rtol=0.0, atol=0.0)


def test_hamiltonian_real_symmetric():
    rng = np.random.default_rng(7)
    for _ in range(20):
        cfg, omega_rf = _random_config(rng)
        h = build_hamiltonian(cfg, omega_rf)
        assert h.dtype == np.float64
        np.testing.assert_array_equal(h, h.T)
        assert h[0, 1] == 0.5 * cfg.omega_p
        assert h[1, 2] == 0.5 * cfg.omega_c
        assert h[2, 3] == 0.5 * omega_rf


def test_hamiltonian_rejects_negative_rf():
    with pytest.raises(DomainViolation):
        build_hamiltonian(BASE, -1.0)


# ---------------------------------------------------------------------------
# Steady-state invariants
# ---------------------------------------------------------------------------


def test_steady_state_invariants_randomized():
    rng = np.random.default_rng(42)
    for _ in range(100):
        cfg, omega_rf = _random_config(rng)
        state = steady_state(cfg, omega_rf)
        rho = state.rho
        assert np.max(np.abs(rho - rho.conj().T)) <= 1e-10
        assert abs(np.trace(rho) - 1.0) <= 1e-10
        diag = rho.diagonal()
        assert np.max(np.abs(diag.imag)) <= 1e-10
        assert diag.real.min() >= -1e-10
        assert diag.real.max() <= 1.0 + 1e-10
        assert np.linalg.eigvalsh(rho).min() >= -1e-8
        assert state.residual <= 1e-10
        assert lindblad_residual(cfg, omega_rf, rho) <= 1e-10


def test_steady_state_no_probe_all_population_in_ground():
    cfg = AtomicConfig(omega_p=0.0)
    state = steady_state(cfg, TWO_PI * 1e6)
    np.testing.assert_allclose(state.rho, np.diag([1.0, 0.0, 0.0, 0.0]), atol=1e-12)


def test_steady_state_deterministic_bit_for_bit():
    a = steady_state(BASE, 0.0)
    b = steady_state(BASE, 0.0)
    np.testing.assert_array_equal(a.rho, b.rho)
    assert a.residual == b.residual


def test_steady_state_requires_a_refill_channel():
    with pytest.raises(SingularSystem):
        steady_state(AtomicConfig(gamma2=0.0), TWO_PI * 1e6)


def test_steady_state_pure_collisional_loss_has_no_unit_trace_state():
    # Collisional loss drains population that nothing refills, so no
    # unit-trace fixed point exists and the solver must say so.
    cfg = AtomicConfig(gamma_c=TWO_PI * 1e5)
    with pytest.raises(SingularSystem):
        steady_state(cfg, TWO_PI * 1e6)


def test_config_validation_rejects_negative_rates():
    with pytest.raises(DomainViolation):
        AtomicConfig(gamma2=-1.0)
    with pytest.raises(DomainViolation):
        AtomicConfig(omega_p=-5.0)
    with pytest.raises(DomainViolation):
        AtomicConfig(upsilon=0.0)


# ---------------------------------------------------------------------------
# Oracle 1: dense time propagation of the vectorized generator
# ---------------------------------------------------------------------------


def _propagation_oracle(cfg: AtomicConfig, omega_rf: float) -> np.ndarray:
    """Integrate the master equation from the ground state until static.

    Built independently of the implementation: the right-hand side is
    evaluated matrix-wise (commutator, anticommutator, repopulation) and
    vectorized by probing it with basis matrices; the affine flow is then
    advanced by repeated squaring of an augmented matrix exponential.
    """
    scale = max(
        cfg.omega_p, cfg.omega_c, omega_rf,
        abs(cfg.delta_p), abs(cfg.delta_c), abs(cfg.delta_l),
        cfg.gamma, cfg.gamma_c, cfg.gamma2, cfg.gamma3, cfg.gamma4,
    )
    h = np.zeros((4, 4))
    h[0, 1] = h[1, 0] = 0.5 * cfg.omega_p
    h[1, 2] = h[2, 1] = 0.5 * cfg.omega_c
    h[2, 3] = h[3, 2] = 0.5 * omega_rf
    h[1, 1] = cfg.delta_p
    h[2, 2] = cfg.delta_p + cfg.delta_c
    h[3, 3] = cfg.delta_p + cfg.delta_c + cfg.delta_l
    h = h / scale
    gam = np.diag([
        cfg.gamma,
        cfg.gamma + cfg.gamma2,
        cfg.gamma + cfg.gamma3 + cfg.gamma_c,
        cfg.gamma + cfg.gamma4,
    ]) / scale

    def rhs(rho: np.ndarray) -> np.ndarray:
        lam = np.zeros((4, 4), dtype=complex)
        lam[0, 0] = (cfg.gamma + cfg.gamma2 * rho[1, 1] + cfg.gamma4 * rho[3, 3]) / scale
        lam[1, 1] = cfg.gamma3 * rho[2, 2] / scale
        return -1j * (h @ rho - rho @ h) - 0.5 * (gam @ rho + rho @ gam) + lam

    basis = np.zeros((4, 4), dtype=complex)
    b_vec = rhs(basis).reshape(16)
    a_mat = np.zeros((16, 16), dtype=complex)
    for j in range(16):
        e = np.zeros(16, dtype=complex)
        e[j] = 1.0
        a_mat[:, j] = rhs(e.reshape(4, 4)).reshape(16) - b_vec

    aug = np.zeros((17, 17), dtype=complex)
    aug[:16, :16] = a_mat
    aug[:16, 16] = b_vec
    step = scipy.linalg.expm(aug)  # one normalized time unit
    vec = np.zeros(16, dtype=complex)
    vec[0] = 1.0
    for _ in range(200):
        vec = step[:16, :16] @ vec + step[:16, 16]
        if np.max(np.abs(a_mat @ vec + b_vec)) < 1e-12:
            break
        step = step @ step  # double the propagation time
    else:  # pragma: no cover - would mean the flow never settled
        raise AssertionError("time propagation did not converge")
    return vec.reshape(4, 4)


def test_steady_state_matches_time_propagation_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(10):
        cfg, omega_rf = _random_config(rng)
        solved = steady_state(cfg, omega_rf)
        propagated = _propagation_oracle(cfg, omega_rf)
        assert abs(solved.rho[1, 0] - propagated[1, 0]) <= 1e-8
        assert np.max(np.abs(solved.rho - propagated)) <= 1e-8


# ---------------------------------------------------------------------------
# Oracle 2: weak-probe continued fraction for the probe coherence
# ---------------------------------------------------------------------------


def _weak_probe_coherence(cfg: AtomicConfig, omega_rf: float) -> complex:
    """First-order probe coherence via the ladder continued fraction."""
    g = decay_rates(cfg)
    g21 = 0.5 * (g[1] + g[0])
    g31 = 0.5 * (g[2] + g[0])
    g41 = 0.5 * (g[3] + g[0])
    d4 = g41 + 1j * (cfg.delta_p + cfg.delta_c + cfg.delta_l)
    d3 = g31 + 1j * (cfg.delta_p + cfg.delta_c) + (0.5 * omega_rf) ** 2 / d4
    d2 = g21 + 1j * cfg.delta_p + (0.5 * cfg.omega_c) ** 2 / d3
    return -1j * (0.5 * cfg.omega_p) / d2


@pytest.mark.parametrize("omega_rf", [0.0, TWO_PI * 2.0e6])
def test_weak_probe_matches_continued_fraction(omega_rf):
    cfg = AtomicConfig(
        omega_p=1e3,  # far below gamma2: linear response regime
        omega_c=TWO_PI * 0.97e6,
        delta_p=0.3e6,
        delta_c=-0.2e6,
        delta_l=0.15e6,
    )
    got = steady_state(cfg, omega_rf).probe_coherence
    want = _weak_probe_coherence(cfg, omega_rf)
    assert abs(got - want) / abs(want) <= 1e-6


# ---------------------------------------------------------------------------
# Susceptibility
# ---------------------------------------------------------------------------


def test_susceptibility_rejects_zero_probe():
    with pytest.raises(ZeroProbe):
        susceptibility(AtomicConfig(omega_p=0.0), 0.0)
    with pytest.raises(ZeroProbe):
        susceptibility_derivative(AtomicConfig(omega_p=0.0), 1e6)


def test_susceptibility_weak_probe_limit_is_finite_and_stable():
    lo = susceptibility(AtomicConfig(omega_p=1e3), TWO_PI * 1e6)
    hi = susceptibility(AtomicConfig(omega_p=2e3), TWO_PI * 1e6)
    assert np.isfinite(lo.real) and np.isfinite(lo.imag)
    assert abs(lo - hi) / abs(lo) < 1e-4


def test_susceptibility_deterministic():
    a = susceptibility(BASE, TWO_PI * 1e6)
    b = susceptibility(BASE, TWO_PI * 1e6)
    assert a == b


def test_susceptibility_absorption_non_negative_at_resonance():
    chi = susceptibility(BASE, 0.0)
    assert chi.imag >= -1e-12


def test_susceptibility_rf_dependence_and_continuity():
    # Coarse continuity over the full tuning range: adjacent samples on a
    # 1e4 rad/s grid move by less than 1% of the dynamic range.
    grid = np.arange(0.0, 10.0 * BASE.omega_c, 1e4)
    values = np.array([susceptibility(BASE, w).imag for w in grid])
    dynamic = values.max() - values.min()
    assert dynamic > 0.0
    assert np.max(np.abs(np.diff(values))) < 1e-2 * dynamic
    # The response actually depends on the RF drive.
    assert abs(values[0] - values[-1]) > 1e-3 * dynamic


def test_susceptibility_fine_continuity_near_peak():
    # Fine continuity on a 1e3 rad/s grid: adjacent samples move by less
    # than 1e-3 of the response's full dynamic range (established on a
    # coarse scan of the whole tuning span).
    coarse = np.arange(0.0, 10.0 * BASE.omega_c, 1e5)
    dynamic = np.ptp(np.array([susceptibility(BASE, w).imag for w in coarse]))
    center = BASE.omega_c
    grid = np.arange(center - 1e6, center + 1e6, 1e3)
    values = np.array([susceptibility(BASE, w).imag for w in grid])
    assert np.max(np.abs(np.diff(values))) < 1e-3 * dynamic


# ---------------------------------------------------------------------------
# Susceptibility derivative
# ---------------------------------------------------------------------------


def test_derivative_matches_step_halving_oracle():
    omega_l = TWO_PI * 1.2e6
    got = susceptibility_derivative(BASE, omega_l)

    def central(h: float) -> complex:
        return (susceptibility(BASE, omega_l + h) - susceptibility(BASE, omega_l - h)) / (2 * h)

    h = 1e-4 * omega_l
    d1, d2 = central(h), central(0.5 * h)
    oracle = (4.0 * d2 - d1) / 3.0
    assert abs(got - oracle) / abs(oracle) <= 1e-6


def test_derivative_matches_secant_slope():
    omega_l = TWO_PI * 1.2e6
    got = susceptibility_derivative(BASE, omega_l)
    dw = 1e-3 * omega_l
    secant = (susceptibility(BASE, omega_l + dw) - susceptibility(BASE, omega_l - dw)) / (2 * dw)
    assert abs(got - secant) / abs(secant) <= 1e-4


def test_derivative_vanishes_at_absorption_extremum():
    # A detuned ladder has a transparency notch at the field strength where
    # one dressed state restores the two-photon resonance; the absorption
    # has an interior minimum there.  Locate it using only the
    # susceptibility itself (bisection on the sign of a wide central
    # difference), then check the reported slope at that point is zero to
    # within the localization budget: |slope| <= |curvature| * bracket.
    cfg = replace(BASE, delta_p=TWO_PI * 1e6, delta_c=-TWO_PI * 3e6)

    def probe_slope(w: float, h: float) -> float:
        return susceptibility(cfg, w + h).imag - susceptibility(cfg, w - h).imag

    coarse = np.arange(2e5, 2e8, 2e5)
    absorption = np.array([susceptibility(cfg, w).imag for w in coarse])
    notch = int(np.argmin(absorption))
    assert 0 < notch < coarse.size - 1
    lo, hi = coarse[notch - 1], coarse[notch + 1]
    assert probe_slope(lo, 32.0) < 0.0 < probe_slope(hi, 32.0)
    while hi - lo > 256.0:
        mid = 0.5 * (lo + hi)
        if probe_slope(mid, 32.0) < 0.0:
            lo = mid
        else:
            hi = mid
    omega_star = 0.5 * (lo + hi)

    slope = susceptibility_derivative(cfg, omega_star).imag
    dw = 1e4
    curvature = (
        susceptibility_derivative(cfg, omega_star + dw).imag
        - susceptibility_derivative(cfg, omega_star - dw).imag
    ) / (2.0 * dw)
    scale = max(
        abs(susceptibility_derivative(cfg, w).imag)
        for w in np.linspace(0.2 * omega_star, 2.0 * omega_star, 8)
    )
    assert abs(slope) <= abs(curvature) * (hi - lo)
    assert abs(slope) <= 1e-4 * scale


def test_derivative_requires_positive_operating_point():
    with pytest.raises(DomainViolation):
        susceptibility_derivative(BASE, 0.0)
