"""Link-level SINR, Monte Carlo ergodic rates, and closed-form benchmarks.

The receiver applies a linear combiner (maximum-ratio or zero-forcing)
to the per-sensor outputs; each user's SINR follows from the combined
signal, inter-user interference, and noise powers.  A Monte Carlo engine
averages the instantaneous rate over channel draws with deterministic
per-trial random streams, and the closed-form layer evaluates the
large-array rate expressions, the Toeplitz-correlation bounds they rely
on, and the comparison quantities against a classical RF antenna-array
baseline.

Rates are in bits/s/Hz; powers in W; all SNR quantities are linear.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .constants import C_LIGHT, EPS0, EULER_GAMMA, HBAR, K_B, TWO_PI, db_to_linear
from .errors import DimensionMismatch, DomainViolation, NumericalError, SingularGram
from .quantum import AtomicConfig, susceptibility, susceptibility_derivative
from .transduction import OpticalConfig, probe_output

__all__ = [
    "CombinerKind",
    "RateEstimate",
    "RadioBaseline",
    "radio_baseline",
    "snr0_per_antenna",
    "sinr",
    "ergodic_rate_mc",
    "closed_form_rate",
    "zeta_bound",
    "lb_bound",
    "rate_gaps",
    "mmimo_baseline_rate",
    "comparison_suite",
    "snr_ratio_per_sensor",
    "power_scaling_limit",
]

CombinerKind = Literal["mrc", "zf"]
RateCase = Literal["mrc_ufc", "mrc_cfc", "zf_ufc", "zf_cfc"]

# Gram-matrix condition number beyond which the zero-forcing combiner is
# considered numerically singular for the current draw.
_GRAM_COND_LIMIT = 1e12
# A Monte Carlo trial whose Gram matrix is singular is redrawn at most this
# many times before the run aborts.
_MAX_RESAMPLES = 3


@dataclass(frozen=True)
class RateEstimate:
    """Monte Carlo ergodic-rate estimate for all users.

    Attributes
    ----------
    per_user_rate : numpy.ndarray
        Sample mean of ``log2(1 + sinr)`` per user [bits/s/Hz].
    stderr : numpy.ndarray
        Standard error of that mean, per user.
    jensen_rate : numpy.ndarray
        ``log2(1 + mean sinr)`` per user, the surrogate the closed-form
        expressions approximate.
    trials : int
        Number of channel draws averaged.
    """

    per_user_rate: np.ndarray
    stderr: np.ndarray
    jensen_rate: np.ndarray
    trials: int


@dataclass(frozen=True)
class RadioBaseline:
    """Classical antenna-array receive chain used for comparisons.

    Attributes
    ----------
    varrho0 : float
        Chain gain: antenna efficiency times antenna gain times LNA gain.
    a_iso : float
        Effective aperture of an isotropic antenna at the carrier [m^2].
    sigma0_sq : float
        Thermal noise power after the chain [W].
    bandwidth : float
        Signal bandwidth the noise power was computed for [Hz].
    """

    varrho0: float
    a_iso: float
    sigma0_sq: float
    bandwidth: float

    def __post_init__(self) -> None:
        for name in ("varrho0", "a_iso", "sigma0_sq", "bandwidth"):
            if getattr(self, name) <= 0.0:
                raise DomainViolation(f"{name} must be positive, got {getattr(self, name)}")


def radio_baseline(
    f_rf: float = 6.95e9,
    bandwidth: float = 1e5,
    noise_figure_db: float = 6.0,
    g_lna_db: float = 20.0,
    g_ant_db: float = 8.0,
    eta0: float = 0.9,
    t0: float = 290.0,
) -> RadioBaseline:
    """Assemble the classical-chain baseline from link-budget primitives.

    The noise power is ``k_B * t0 * bandwidth`` raised by the noise
    factor and the LNA gain; the aperture is ``lambda^2 / (4 pi)`` at the
    RF carrier.
    """
    for name, value in (("f_rf", f_rf), ("bandwidth", bandwidth), ("eta0", eta0), ("t0", t0)):
        if value <= 0.0:
            raise DomainViolation(f"{name} must be positive, got {value}")
    wavelength = C_LIGHT / f_rf
    return RadioBaseline(
        varrho0=eta0 * db_to_linear(g_ant_db) * db_to_linear(g_lna_db),
        a_iso=wavelength**2 / (4.0 * np.pi),
        sigma0_sq=K_B * t0 * bandwidth * db_to_linear(noise_figure_db) * db_to_linear(g_lna_db),
        bandwidth=bandwidth,
    )


def snr0_per_antenna(baseline: RadioBaseline, p_s: float, beta_k: float) -> float:
    """Per-antenna SNR of the classical chain for one user."""
    if p_s <= 0.0 or beta_k <= 0.0:
        raise DomainViolation("p_s and beta_k must be positive")
    return baseline.varrho0 * baseline.a_iso * p_s * beta_k / baseline.sigma0_sq


def _zf_combiner(a: np.ndarray) -> np.ndarray:
    """Zero-forcing combiner columns for the effective channel ``a``.

    Computed from the reduced QR factorization so the Gram matrix is
    never formed explicitly; raises SingularGram when the Gram condition
    number exceeds the module limit.
    """
    q, r = np.linalg.qr(a)
    # cond(A^H A) = cond(A)^2, and R shares A's singular values.
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[-1] == 0.0 or (sv[0] / sv[-1]) ** 2 > _GRAM_COND_LIMIT:
        raise SingularGram(
            f"effective-channel Gram condition {(sv[0] / max(sv[-1], 1e-300)) ** 2:.3e} "
            f"exceeds {_GRAM_COND_LIMIT:.0e}"
        )
    # C = A (A^H A)^{-1} = Q R^{-H}
    return q @ solve_triangular(r, np.eye(r.shape[0], dtype=a.dtype), lower=False).conj().T


def sinr(
    combiner: CombinerKind,
    theta_diag: np.ndarray,
    h: np.ndarray,
    p_s: float,
    sigma_sq: float,
    k: int,
) -> float:
    """Post-combining SINR of user ``k`` for one channel realization.

    ``theta_diag`` holds the per-sensor complex readout coefficients
    (the diagonal of the transduction matrix).  The combiner is either
    the matched filter on the effective channel or its zero-forcing
    counterpart.
    """
    h = np.asarray(h)
    theta = np.asarray(theta_diag)
    if h.ndim != 2:
        raise DimensionMismatch(f"h must be M x K, got shape {h.shape}")
    m, k_users = h.shape
    if theta.shape != (m,):
        raise DimensionMismatch(f"theta_diag must have length {m}, got {theta.shape}")
    if not 0 <= k < k_users:
        raise DomainViolation(f"user index {k} outside [0, {k_users})")
    if p_s <= 0.0 or sigma_sq <= 0.0:
        raise DomainViolation("p_s and sigma_sq must be positive")
    effective = theta[:, None] * h
    if combiner == "mrc":
        c_k = effective[:, k]
    elif combiner == "zf":
        if m <= k_users:
            raise DomainViolation(f"zero forcing requires M > K, got M={m}, K={k_users}")
        c_k = _zf_combiner(effective)[:, k]
    else:
        raise DomainViolation(f"combiner must be 'mrc' or 'zf', got {combiner!r}")
    projections = c_k.conj() @ effective
    signal = p_s * np.abs(projections[k]) ** 2
    interference = p_s * (np.sum(np.abs(projections) ** 2) - np.abs(projections[k]) ** 2)
    noise = sigma_sq * float(np.real(c_k.conj() @ c_k))
    return float(signal / (interference + noise))


def _trial_sinrs(
    combiner: CombinerKind,
    m: int,
    betas: np.ndarray,
    sqrt_lambdas: np.ndarray | None,
    p_tilde: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """All-user SINRs for one channel draw via the Gram matrix.

    With per-sensor readout coefficients of uniform modulus the full
    SINR expression collapses onto the channel Gram matrix W = H^H H and
    the single scalar ``p_tilde`` (signal power times detection gain
    over noise power); this is exact, not an approximation, and is the
    fast path the Monte Carlo engine uses.
    """
    k_users = betas.size
    g = (rng.standard_normal((m, k_users)) + 1j * rng.standard_normal((m, k_users))) / np.sqrt(
        2.0
    )
    if sqrt_lambdas is not None:
        g = sqrt_lambdas[:, None] * g
    a = g * np.sqrt(betas)[None, :]
    w = a.conj().T @ a
    diag = np.real(np.diag(w))
    if combiner == "mrc":
        row_power = np.sum(np.abs(w) ** 2, axis=1) - diag**2
        return (p_tilde * diag**2) / (p_tilde * row_power + diag)
    sv = np.linalg.svd(w, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > _GRAM_COND_LIMIT:
        raise SingularGram(
            f"channel Gram condition exceeds {_GRAM_COND_LIMIT:.0e} for this draw"
        )
    inverse_diag = np.real(np.diag(np.linalg.inv(w)))
    return p_tilde / inverse_diag


def ergodic_rate_mc(
    combiner: CombinerKind,
    m: int,
    betas: Sequence[float],
    p_s: float,
    varrho: float,
    cos2_varphi: float,
    sigma_sq: float,
    trials: int,
    master_seed: int,
    sweep_idx: int = 0,
    sqrt_lambdas: np.ndarray | None = None,
    threads: int | None = None,
) -> RateEstimate:
    """Monte Carlo ergodic achievable rate per user.

    Channel draws use independent random streams derived from
    ``(master_seed, sweep_idx, trial, attempt)``, so the result is
    bit-identical for any thread count and any scheduling order; the
    correlated model is selected by passing the per-sensor eigenvalue
    roots ``sqrt_lambdas``.  A draw whose Gram matrix is singular under
    zero forcing is redrawn at most three times before the run aborts.

    Returns both the true ergodic mean of ``log2(1 + sinr)`` and the
    Jensen surrogate ``log2(1 + mean sinr)``.
    """
    if trials < 1:
        raise DomainViolation(f"trials must be at least 1, got {trials}")
    if combiner not in ("mrc", "zf"):
        raise DomainViolation(f"combiner must be 'mrc' or 'zf', got {combiner!r}")
    betas_arr = np.asarray(betas, dtype=float)
    if combiner == "zf" and m <= betas_arr.size:
        raise DomainViolation(f"zero forcing requires M > K, got M={m}, K={betas_arr.size}")
    if p_s <= 0.0 or varrho <= 0.0 or sigma_sq <= 0.0:
        raise DomainViolation("p_s, varrho, and sigma_sq must be positive")
    if not 0.0 <= cos2_varphi <= 1.0:
        raise DomainViolation(f"cos2_varphi must be in [0, 1], got {cos2_varphi}")
    if sqrt_lambdas is not None:
        sqrt_lambdas = np.asarray(sqrt_lambdas, dtype=float)
        if sqrt_lambdas.shape != (m,):
            raise DimensionMismatch(
                f"sqrt_lambdas must have length {m}, got {sqrt_lambdas.shape}"
            )
    p_tilde = p_s * varrho * cos2_varphi / sigma_sq
    k_users = betas_arr.size
    sinrs = np.empty((trials, k_users))

    def run_slice(start: int, stop: int) -> None:
        for trial in range(start, stop):
            for attempt in range(_MAX_RESAMPLES + 1):
                seq = np.random.SeedSequence(
                    entropy=master_seed, spawn_key=(sweep_idx, trial, attempt)
                )
                try:
                    sinrs[trial] = _trial_sinrs(
                        combiner, m, betas_arr, sqrt_lambdas, p_tilde,
                        np.random.default_rng(seq),
                    )
                    break
                except SingularGram:
                    if attempt == _MAX_RESAMPLES:
                        raise NumericalError(
                            f"trial {trial} stayed singular after {_MAX_RESAMPLES} redraws"
                        ) from None
            # attempt loop always breaks or raises

    workers = threads if threads is not None else _worker_count()
    workers = max(1, min(workers, trials))
    if workers == 1:
        run_slice(0, trials)
    else:
        bounds = np.linspace(0, trials, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_slice, int(bounds[i]), int(bounds[i + 1]))
                for i in range(workers)
            ]
            for future in futures:
                future.result()

    log_rates = np.log2(1.0 + sinrs)
    per_user = log_rates.mean(axis=0)
    if trials > 1:
        stderr = log_rates.std(axis=0, ddof=1) / np.sqrt(trials)
    else:
        stderr = np.zeros(k_users)
    jensen = np.log2(1.0 + sinrs.mean(axis=0))
    return RateEstimate(per_user_rate=per_user, stderr=stderr, jensen_rate=jensen, trials=trials)


def _worker_count() -> int:
    """Worker count: the RAQMIMO_THREADS variable or hardware parallelism."""
    env = os.environ.get("RAQMIMO_THREADS")
    if env is not None:
        try:
            count = int(env)
        except ValueError as exc:
            raise DomainViolation(f"RAQMIMO_THREADS must be an integer, got {env!r}") from exc
        if count < 1:
            raise DomainViolation(f"RAQMIMO_THREADS must be positive, got {count}")
        return count
    return os.cpu_count() or 1


def _theorem_rate(
    case: RateCase,
    m: int,
    k_users: int,
    s_values: np.ndarray,
    betas: np.ndarray,
    zeta: float | None,
) -> np.ndarray:
    """Shared large-array rate expressions for both receiver families."""
    if s_values.shape != (k_users,) or betas.shape != (k_users,):
        raise DimensionMismatch(
            f"need {k_users} per-user SNR values and betas, got {s_values.shape} and {betas.shape}"
        )
    if np.any(betas <= 0.0):
        raise DomainViolation("all betas must be positive")
    total_beta = betas.sum()
    others = total_beta - betas
    if case == "mrc_ufc":
        if m < 2:
            raise DomainViolation(f"mrc_ufc requires M >= 2, got {m}")
        return np.log2(1.0 + (m - 1) * s_values / (1.0 + s_values / betas * others))
    if case == "mrc_cfc":
        if m < 3:
            raise DomainViolation(f"mrc_cfc requires M >= 3, got {m}")
        if zeta is None:
            raise DomainViolation("mrc_cfc requires the correlation penalty zeta")
        return np.log2(1.0 + (m - 2) * s_values / (1.0 + zeta * s_values / betas * others))
    if case == "zf_ufc":
        if m <= k_users:
            raise DomainViolation(f"zf_ufc requires M > K, got M={m}, K={k_users}")
        return np.log2(1.0 + (m - k_users) * s_values)
    if case == "zf_cfc":
        if m <= 2 * k_users + 2:
            raise DomainViolation(f"zf_cfc requires M > 2K+2, got M={m}, K={k_users}")
        return np.log2(1.0 + (m - 2 * k_users - 2) * s_values)
    raise DomainViolation(f"unknown rate case {case!r}")


def closed_form_rate(
    case: RateCase,
    m: int,
    k_users: int,
    snr1: Sequence[float],
    betas: Sequence[float],
    cos2_varphi: float,
    zeta: float | None = None,
) -> np.ndarray:
    """Large-array closed-form rate per user for the sensor array.

    The correlated MRC expression is a lower bound through the
    correlation penalty ``zeta``; the other three are asymptotic
    equalities.
    """
    if not 0.0 <= cos2_varphi <= 1.0:
        raise DomainViolation(f"cos2_varphi must be in [0, 1], got {cos2_varphi}")
    s = np.asarray(snr1, dtype=float) * cos2_varphi
    return _theorem_rate(case, m, k_users, s, np.asarray(betas, dtype=float), zeta)


def mmimo_baseline_rate(
    case: RateCase,
    m: int,
    k_users: int,
    snr0: Sequence[float],
    betas: Sequence[float],
    zeta: float | None = None,
) -> np.ndarray:
    """Large-array closed-form rate per user for the classical array.

    Identical expressions with the per-antenna SNR in place of the
    per-sensor SNR times the detection-phase factor.
    """
    return _theorem_rate(
        case, m, k_users, np.asarray(snr0, dtype=float), np.asarray(betas, dtype=float), zeta
    )


def zeta_bound(m: int, varpi: float) -> float:
    """Upper bound on the correlation penalty, by array-size parity."""
    if m < 4:
        raise DomainViolation(f"m must be at least 4, got {m}")
    if varpi <= 0.0:
        raise DomainViolation(f"varpi must be positive, got {varpi}")
    base = 1.0 + (1.0 / varpi - 2.0 / np.pi)
    if m % 2 == 1:
        half = int(np.ceil(m / 2.0)) - 1
        return base + 2.0 / (np.pi * varpi) * (EULER_GAMMA + np.log(half))
    return (
        base
        + 2.0 / (np.pi * varpi) * (EULER_GAMMA + np.log(m / 2.0 - 1.0))
        + 4.0 / (np.pi * varpi) * (1.0 + np.sin(varpi * m)) / m
    )


def lb_bound(m: int, varpi: float) -> float:
    """Lower bound companion of :func:`zeta_bound` for the same quantity."""
    if m < 4:
        raise DomainViolation(f"m must be at least 4, got {m}")
    if varpi <= 0.0:
        raise DomainViolation(f"varpi must be positive, got {varpi}")
    return (
        1.0
        + 1.0 / (np.pi * varpi) * (EULER_GAMMA + np.log(m - 1.0))
        + (1.0 / (2.0 * varpi) - 1.0 / np.pi)
    )


def rate_gaps(
    m: int,
    k_users: int,
    snr1: Sequence[float],
    betas: Sequence[float],
    varpi: float,
) -> dict[str, object]:
    """High-SINR limiting rate gaps between fading families and combiners.

    Valid in the high-SINR regime (per-user SINR of at least ~20 dB);
    the caller asserts that regime.  Returns the fading-family gap for
    each combiner and the per-user combiner gaps under each family.
    """
    if m < 3:
        raise DomainViolation(f"m must be at least 3, got {m}")
    if varpi <= 0.0:
        raise DomainViolation(f"varpi must be positive, got {varpi}")
    snr1_arr = np.asarray(snr1, dtype=float)
    betas_arr = np.asarray(betas, dtype=float)
    if snr1_arr.shape != (k_users,) or betas_arr.shape != (k_users,):
        raise DimensionMismatch("snr1 and betas must both have length k_users")
    family_gap = np.log2(2.0 * np.log(m) / (np.pi * varpi))
    others = betas_arr.sum() - betas_arr
    combiner_gap_ufc = np.log2(1.0 + snr1_arr / betas_arr * others)
    return {
        "mrc_ufc_minus_cfc": float(family_gap),
        "zf_ufc_minus_cfc": 0.0,
        "zf_minus_mrc_ufc": combiner_gap_ufc,
        "zf_minus_mrc_cfc": combiner_gap_ufc + family_gap,
    }


def comparison_suite(pi_ratio_db: float, nu_exponent: float) -> dict[str, float]:
    """Rate, power, and distance advantages implied by a per-sensor SNR ratio.

    For a linear per-sensor SNR ratio ``Pi`` the rate gap is
    ``log2(Pi)`` bits, an equal-rate operating point allows a transmit
    power reduction by the factor ``Pi``, and at equal power the range
    extends by ``Pi**(1/nu)`` under a path-loss exponent ``nu``.
    """
    if nu_exponent < 2.0:
        raise DomainViolation(f"nu_exponent must be at least 2, got {nu_exponent}")
    pi_linear = db_to_linear(pi_ratio_db)
    return {
        "delta_rate": float(np.log2(pi_linear)),
        "power_factor": float(pi_linear),
        "distance_factor": float(pi_linear ** (1.0 / nu_exponent)),
    }


def snr_ratio_per_sensor(
    regime: Literal["sql", "psl"],
    atomic,
    opt,
    omega_l: float,
    baseline: RadioBaseline,
) -> float:
    """Per-sensor SNR of the vapor sensor over the classical antenna.

    Independent of transmit power, bandwidth, and large-scale fading:
    those cancel between numerator and denominator.  The classical-chain
    factors enter through ``sigma0_sq / (bandwidth * varrho0)`` and the
    aperture ratio.
    """
    from .quantum import susceptibility, susceptibility_derivative
    from .transduction import probe_output

    chain_factor = baseline.sigma0_sq / (baseline.bandwidth * baseline.varrho0)
    if regime == "sql":
        return (
            (2.0 * atomic.mu34**2 / (C_LIGHT * 8.8541878128e-12 * 1.054571817e-34**2))
            * (atomic.effective_density / atomic.dephasing_rate)
            * (opt.cross_section * opt.cell_length / baseline.a_iso)
            * chain_factor
        )
    if regime == "psl":
        chi = susceptibility(atomic, omega_l)
        chi_prime = susceptibility_derivative(atomic, omega_l)
        amplitude, _, _ = probe_output(opt, chi)
        kappa = (opt.wavenumber * opt.cell_length * atomic.mu34 / (2.0 * 1.054571817e-34)) * abs(
            chi_prime
        )
        omega_optical = 2.0 * np.pi * opt.f_p
        return (
            (opt.eta_q * amplitude**2 * kappa**2 / (1.054571817e-34 * omega_optical))
            * (opt.cross_section / baseline.a_iso)
            * chain_factor
        )
    raise DomainViolation(f"regime must be 'sql' or 'psl', got {regime!r}")


def power_scaling_limit(
    e_total: float,
    varrho: float,
    cos2_varphi: float,
    sigma_sq: float,
    beta_k: float,
) -> float:
    """Large-array rate limit under power scaled down with the array size.

    When each user transmits ``e_total / M`` the rate converges to a
    combiner- and user-count-independent value set only by the energy
    budget, the detection gain and phase, the noise power, and the
    user's large-scale coefficient.
    """
    for name, value in (
        ("e_total", e_total),
        ("varrho", varrho),
        ("sigma_sq", sigma_sq),
        ("beta_k", beta_k),
    ):
        if value <= 0.0:
            raise DomainViolation(f"{name} must be positive, got {value}")
    if not 0.0 <= cos2_varphi <= 1.0:
        raise DomainViolation(f"cos2_varphi must be in [0, 1], got {cos2_varphi}")
    return float(np.log2(1.0 + e_total * varrho * cos2_varphi * beta_k / sigma_sq))
