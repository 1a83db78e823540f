"""Optical transduction chain from the vapor cell to per-sensor readout.

The RF field reaching each sensor modulates the vapor susceptibility; the
probe beam picks that up as amplitude attenuation and phase rotation,
and a balanced coherent detector mixing the probe with a local optical
beam converts it to an electrical signal.  This module maps a complex
susceptibility (and its derivative with respect to the RF Rabi
frequency) to the quantities the link-budget layer consumes: the readout
slope, the detection power gain, the per-sensor phase factor, and the
per-sensor SNR in the two standard noise regimes.

Amplitudes are in V/m, powers in W, phases in rad; the readout slope has
units of s/rad (inverse angular frequency).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .constants import C_LIGHT, E_CHARGE, EPS0, HBAR, TWO_PI
from .errors import DegenerateSlope, DimensionMismatch, DomainViolation
from .quantum import AtomicConfig, susceptibility, susceptibility_derivative

__all__ = [
    "OpticalConfig",
    "QuantumReadout",
    "probe_output",
    "readout",
    "lo_phase_ramp",
    "snr1_per_sensor",
    "superposition_amplitude",
    "linear_model_error",
]

# |chi'| below this is treated as a dead operating point: the readout slope
# carries no usable direction, so kappa and psi fall back to zero.
_SLOPE_FLOOR = 1e-30
# Samples per beat period used when measuring the linear-model error.
_BEAT_SAMPLES = 1024


@dataclass(frozen=True)
class OpticalConfig:
    """Probe beam, local optical beam, and detector-chain parameters.

    Parameters
    ----------
    u0 : float
        Probe amplitude at the cell input [V/m].  The default matches the
        default probe Rabi frequency of :class:`AtomicConfig` through the
        default probe dipole moment.
    f_p : float
        Probe optical frequency [Hz]; the default sits on the Cs D2 line.
    cell_length : float
        Vapor-cell length traversed by the probe [m].
    fwhm : float
        Probe-beam full width at half maximum [m]; sets the beam
        cross-section ``pi * fwhm**2 / (2 ln 2)``.
    p_lob : float
        Local optical beam power [W].
    phi_lob : float
        Local optical beam phase [rad].
    g_lna : float
        Low-noise amplifier gain of the detector chain (linear).
    eta_q : float
        Detector quantum efficiency, in (0, 1].
    """

    u0: float = 148.7
    f_p: float = 3.5172e14
    cell_length: float = 0.02
    fwhm: float = 1.7e-3
    p_lob: float = 0.01
    phi_lob: float = 0.0
    g_lna: float = 100.0
    eta_q: float = 0.8

    def __post_init__(self) -> None:
        for name in ("u0", "f_p", "cell_length", "fwhm", "p_lob", "g_lna"):
            if getattr(self, name) <= 0.0:
                raise DomainViolation(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.eta_q <= 1.0:
            raise DomainViolation(f"eta_q must be in (0, 1], got {self.eta_q}")

    @property
    def wavenumber(self) -> float:
        """Probe wavenumber 2 pi f_p / c [rad/m]."""
        return TWO_PI * self.f_p / C_LIGHT

    @property
    def cross_section(self) -> float:
        """Probe-beam cross-section pi * fwhm^2 / (2 ln 2) [m^2]."""
        return math.pi * self.fwhm**2 / (2.0 * math.log(2.0))

    @property
    def responsivity(self) -> float:
        """Photodetector responsivity eta_q e / (hbar * 2 pi f_p) [A/W]."""
        return self.eta_q * E_CHARGE / (HBAR * TWO_PI * self.f_p)


@dataclass(frozen=True)
class QuantumReadout:
    """Per-sensor readout of the optical detection chain.

    Attributes
    ----------
    kappa : float
        Readout slope: electrical response per unit RF Rabi frequency
        [s/rad].  Non-negative.
    psi : float
        Slope-direction phase contributed by the vapor response [rad].
    varrho : float
        Detection power gain (dimensionless).
    phi_factor : complex
        Reference-sensor phase factor; modulus at most 1.
    cos2_varphi : float
        Squared cosine of the total detection phase, the factor carried
        by every rate expression downstream.
    """

    kappa: float
    psi: float
    varrho: float
    phi_factor: complex
    cos2_varphi: float


def probe_output(
    opt: OpticalConfig, chi: complex, phi0: float = 0.0
) -> tuple[float, float, float]:
    """Probe amplitude, phase, and power at the cell output.

    The imaginary part of the susceptibility attenuates the amplitude and
    the real part rotates the phase, both through half the optical path
    ``k_p * L``; the output power follows from the amplitude and the beam
    cross-section.

    Returns
    -------
    (amplitude, phase, power) : tuple of float
        Amplitude [V/m], phase [rad] (``phi0`` plus the dispersive
        shift), and power [W].
    """
    half_path = 0.5 * opt.wavenumber * opt.cell_length
    amplitude = opt.u0 * math.exp(-half_path * chi.imag)
    phase = phi0 + half_path * chi.real
    power = (math.pi * C_LIGHT * EPS0 / (8.0 * math.log(2.0))) * opt.fwhm**2 * amplitude**2
    return amplitude, phase, power


def readout(
    opt: OpticalConfig,
    atomic: AtomicConfig,
    chi: complex,
    chi_prime: complex,
    theta_y1: float = 0.0,
    gain_scale: float = 1.0,
) -> QuantumReadout:
    """Balanced-coherent-detection readout at one operating point.

    Parameters
    ----------
    chi, chi_prime : complex
        Susceptibility and its derivative with respect to the RF Rabi
        frequency, both evaluated at the local-oscillator operating
        point.
    theta_y1 : float
        Phase of the reference RF signal at the first sensor [rad].
    gain_scale : float
        Optional per-sensor multiplicative gain perturbation; 1 models
        the homogeneous chain.

    Warns
    -----
    DegenerateSlope
        When ``|chi_prime|`` is numerically zero the slope direction is
        undefined; the readout degrades gracefully to a dead sensor
        (``kappa = 0``, ``psi = 0``, ``varrho = 0``).
    """
    if gain_scale < 0.0:
        raise DomainViolation(f"gain_scale must be non-negative, got {gain_scale}")
    magnitude = abs(chi_prime)
    if magnitude < _SLOPE_FLOOR:
        warnings.warn(
            DegenerateSlope(
                "susceptibility slope is numerically zero; sensor reads out nothing"
            )
        )
        kappa = 0.0
        psi = 0.0
    else:
        kappa = (opt.wavenumber * opt.cell_length * atomic.mu34 / (2.0 * HBAR)) * magnitude
        psi = math.acos(min(1.0, max(-1.0, chi_prime.imag / magnitude)))
    _, phi_p, power = probe_output(opt, chi)
    varphi = opt.phi_lob - phi_p + psi
    varrho = (
        (4.0 * opt.responsivity**2 / (C_LIGHT * EPS0))
        * opt.g_lna
        * opt.p_lob
        * power
        * kappa**2
        * gain_scale
    )
    phi_factor = 0.5 * cmath.exp(-1j * (theta_y1 - varphi)) + 0.5 * cmath.exp(
        -1j * (theta_y1 + varphi)
    )
    return QuantumReadout(
        kappa=kappa,
        psi=psi,
        varrho=varrho,
        phi_factor=phi_factor,
        cos2_varphi=math.cos(varphi) ** 2,
    )


def lo_phase_ramp(m: int, d_over_lambda: float, theta: float) -> complex:
    """Unit-modulus phase of the local oscillator at the ``m``-th sensor.

    A plane wave arriving at angle ``theta`` accumulates a linear phase
    across the uniform array with element spacing ``d_over_lambda``
    wavelengths.
    """
    if m < 1:
        raise DomainViolation(f"sensor index must be at least 1, got {m}")
    if not 0.0 < d_over_lambda <= 0.5:
        raise DomainViolation(f"d_over_lambda must be in (0, 0.5], got {d_over_lambda}")
    return cmath.exp(-1j * TWO_PI * (m - 1) * d_over_lambda * math.sin(theta))


def snr1_per_sensor(
    regime: Literal["sql", "psl"],
    atomic: AtomicConfig,
    opt: OpticalConfig,
    omega_l: float,
    p_s: float,
    bandwidth: float,
    beta_k: float,
) -> float:
    """Single-sensor SNR for one user in the chosen noise regime.

    ``"sql"`` is the standard quantum limit (atom-projection noise):
    the SNR follows from the RF dipole moment, the participating atomic
    density over the probed volume, and the coherence dephasing rate.
    ``"psl"`` is the photon-shot limit of the optical detector: the SNR
    follows from the output probe power and the squared readout slope at
    the operating point ``omega_l``.

    Both scale linearly with received signal power ``p_s * beta_k`` over
    bandwidth.
    """
    if p_s <= 0.0:
        raise DomainViolation(f"p_s must be positive, got {p_s}")
    if bandwidth <= 0.0:
        raise DomainViolation(f"bandwidth must be positive, got {bandwidth}")
    if beta_k <= 0.0:
        raise DomainViolation(f"beta_k must be positive, got {beta_k}")
    if regime == "sql":
        return (
            (2.0 * atomic.mu34**2 / (C_LIGHT * EPS0 * HBAR**2))
            * (atomic.effective_density * opt.cross_section * opt.cell_length)
            / atomic.dephasing_rate
            * (p_s / bandwidth)
            * beta_k
        )
    if regime == "psl":
        chi = susceptibility(atomic, omega_l)
        chi_prime = susceptibility_derivative(atomic, omega_l)
        _, _, power = probe_output(opt, chi)
        kappa = (opt.wavenumber * opt.cell_length * atomic.mu34 / (2.0 * HBAR)) * abs(
            chi_prime
        )
        return (
            (4.0 * opt.responsivity / (C_LIGHT * EPS0 * E_CHARGE))
            * power
            * kappa**2
            * (p_s / bandwidth)
            * beta_k
        )
    raise DomainViolation(f"regime must be 'sql' or 'psl', got {regime!r}")


def superposition_amplitude(
    u_y: float,
    u_x: Sequence[float],
    f_delta: float,
    thetas: Sequence[float],
    t: float,
) -> tuple[float, float]:
    """Beat-note amplitude of the LO plus user fields, exact and linearized.

    The local oscillator (amplitude ``u_y``) and the user signals
    (amplitudes ``u_x``, phases ``thetas``) beat at frequency
    ``f_delta``; the exact envelope is the modulus of the phasor sum,
    while the linearization keeps only the in-phase projection, which is
    what the receiver's linear model assumes.

    Returns
    -------
    (exact, approx) : tuple of float
        Exact envelope and its first-order approximation, both in V/m.
    """
    if u_y <= 0.0:
        raise DomainViolation(f"u_y must be positive, got {u_y}")
    amplitudes = np.asarray(u_x, dtype=float)
    phases = np.asarray(thetas, dtype=float)
    if amplitudes.shape != phases.shape:
        raise DimensionMismatch(
            f"u_x and thetas must have equal length, got {amplitudes.shape} and {phases.shape}"
        )
    if np.any(amplitudes < 0.0):
        raise DomainViolation("user amplitudes must be non-negative")
    beat = TWO_PI * f_delta * t + phases
    in_phase = float(np.sum(amplitudes * np.cos(beat)))
    quadrature = float(np.sum(amplitudes * np.sin(beat)))
    exact = math.hypot(u_y + in_phase, quadrature)
    approx = u_y + in_phase
    return exact, approx


def linear_model_error(u_y: float, sum_ux: float) -> float:
    """Worst-case relative error of the linearized envelope over one beat.

    Evaluates the exact and linearized envelopes with all user phasors
    aligned (the worst case) on a dense grid covering one beat period and
    returns the maximum relative deviation.
    """
    if sum_ux < 0.0:
        raise DomainViolation(f"sum_ux must be non-negative, got {sum_ux}")
    worst = 0.0
    for i in range(_BEAT_SAMPLES):
        t = i / _BEAT_SAMPLES
        exact, approx = superposition_amplitude(u_y, [sum_ux], 1.0, [0.0], t)
        worst = max(worst, abs(exact - approx) / exact)
    return worst
