"""Multi-user channel models for the sensor array.

Two small-scale fading families are supported: uncorrelated fading
("ufc"), where every sensor sees an independent complex Gaussian
coefficient, and correlated fading ("cfc"), where a real symmetric
Toeplitz correlation matrix built from the zeroth-order Bessel function
couples the sensors and the channel is synthesized through its
eigensystem.  Large-scale attenuation comes from a log-distance path
loss with optional log-normal shadowing, and user positions are drawn
uniformly over a disk offset from the receiver.

Users are assumed mutually uncorrelated (spatially well separated), so
no transmit-side correlation is modeled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import j0

from .errors import DimensionMismatch, DomainViolation, IndefiniteCorrelation

__all__ = [
    "ChannelSpec",
    "CorrelationEigs",
    "jakes_correlation",
    "eig_correlation",
    "sample_channel",
    "large_scale_fading",
    "place_users",
]

# Eigenvalues of the correlation matrix more negative than this indicate a
# genuinely indefinite input; anything in [_EIG_FLOOR, 0) is roundoff and is
# clamped to zero before square roots are taken.
_EIG_FLOOR = -1e-8


@dataclass(frozen=True)
class ChannelSpec:
    """Array size, user count, fading family, and large-scale coefficients.

    Parameters
    ----------
    m_sensors : int
        Number of array sensors M, at least 2.
    k_users : int
        Number of simultaneous users K, at least 1.
    model : {"ufc", "cfc"}
        Uncorrelated or correlated small-scale fading.
    varpi : float
        Bessel argument per unit sensor-index separation (dimensionless);
        required positive for the correlated model, ignored otherwise.
    betas : sequence of float
        Per-user large-scale coefficients (linear scale), length K.
    """

    m_sensors: int
    k_users: int
    model: Literal["ufc", "cfc"] = "ufc"
    varpi: float = 1.0
    betas: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.m_sensors < 2:
            raise DomainViolation(f"m_sensors must be at least 2, got {self.m_sensors}")
        if self.k_users < 1:
            raise DomainViolation(f"k_users must be at least 1, got {self.k_users}")
        if self.model not in ("ufc", "cfc"):
            raise DomainViolation(f"model must be 'ufc' or 'cfc', got {self.model!r}")
        if self.model == "cfc" and self.varpi <= 0.0:
            raise DomainViolation(f"varpi must be positive for cfc, got {self.varpi}")
        betas = tuple(float(b) for b in self.betas)
        if not betas:
            betas = (1.0,) * self.k_users
        object.__setattr__(self, "betas", betas)
        if len(betas) != self.k_users:
            raise DimensionMismatch(
                f"betas must have length {self.k_users}, got {len(betas)}"
            )
        if any(b <= 0.0 for b in betas):
            raise DomainViolation("all betas must be positive")


@dataclass(frozen=True)
class CorrelationEigs:
    """Eigensystem of a sensor correlation matrix.

    Attributes
    ----------
    lambdas : numpy.ndarray
        Eigenvalues sorted descending, all non-negative after clamping
        of roundoff-scale negatives.
    u : numpy.ndarray
        Real orthogonal eigenvector matrix (columns), usable as a
        complex unitary.
    """

    lambdas: np.ndarray
    u: np.ndarray

    @property
    def trace_ratio(self) -> float:
        """Sum of squared eigenvalues over the matrix size."""
        return float(np.sum(self.lambdas**2) / self.lambdas.size)


def jakes_correlation(m_sensors: int, varpi: float) -> np.ndarray:
    """Toeplitz sensor correlation with Bessel-J0 off-diagonal decay.

    Entry (m1, m2) is ``J0(varpi * |m1 - m2|)``; the diagonal is exactly
    1.
    """
    if m_sensors < 2:
        raise DomainViolation(f"m_sensors must be at least 2, got {m_sensors}")
    if varpi <= 0.0:
        raise DomainViolation(f"varpi must be positive, got {varpi}")
    first_row = j0(varpi * np.arange(m_sensors))
    return toeplitz(first_row)


def eig_correlation(r: np.ndarray) -> CorrelationEigs:
    """Eigendecomposition of a symmetric correlation matrix.

    Eigenvalues are sorted descending; values in ``[-1e-8, 0)`` are
    treated as roundoff and clamped to zero.

    Raises
    ------
    IndefiniteCorrelation
        If any eigenvalue is more negative than the roundoff floor.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise DimensionMismatch(f"correlation matrix must be square, got {r.shape}")
    if not np.allclose(r, r.T, atol=1e-12):
        raise DomainViolation("correlation matrix must be symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(r)
    if np.any(eigenvalues < _EIG_FLOOR):
        raise IndefiniteCorrelation(
            f"correlation matrix has eigenvalue {eigenvalues.min():.3e} below {_EIG_FLOOR}"
        )
    eigenvalues = np.where(eigenvalues < 0.0, 0.0, eigenvalues)
    order = np.argsort(eigenvalues)[::-1]
    return CorrelationEigs(lambdas=eigenvalues[order], u=eigenvectors[:, order])


def sample_channel(
    spec: ChannelSpec,
    eigs: CorrelationEigs | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one M x K channel matrix.

    The small-scale part is i.i.d. circular complex Gaussian with unit
    variance (one half per real/imaginary component); the correlated
    model scales row m by the square root of the m-th correlation
    eigenvalue and rotates by the eigenvector matrix; columns are scaled
    by the square roots of the large-scale coefficients.
    """
    m, k = spec.m_sensors, spec.k_users
    g = (rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))) / np.sqrt(2.0)
    if spec.model == "cfc":
        if eigs is None:
            raise DimensionMismatch("cfc channel sampling requires a correlation eigensystem")
        if eigs.lambdas.size != m or eigs.u.shape != (m, m):
            raise DimensionMismatch(
                f"correlation eigensystem sized {eigs.lambdas.size} does not match M={m}"
            )
        g = eigs.u @ (np.sqrt(eigs.lambdas)[:, None] * g)
    return g * np.sqrt(np.asarray(spec.betas))[None, :]


def large_scale_fading(
    d_k: float,
    nu_exponent: float,
    beta_ref_db: float = -30.0,
    shadow_sigma_db: float = 0.0,
    rng: np.random.Generator | None = None,
) -> float:
    """Linear large-scale coefficient from log-distance path loss.

    The dB-scale coefficient is ``beta_ref_db + 10 * nu * log10(1/d_k)``
    plus a zero-mean Gaussian shadowing term of standard deviation
    ``shadow_sigma_db`` (drawn only when the deviation is positive, in
    which case ``rng`` is required).
    """
    if d_k < 1.0:
        raise DomainViolation(f"d_k must be at least 1 m, got {d_k}")
    if shadow_sigma_db < 0.0:
        raise DomainViolation(f"shadow_sigma_db must be non-negative, got {shadow_sigma_db}")
    beta_db = beta_ref_db + 10.0 * nu_exponent * np.log10(1.0 / d_k)
    if shadow_sigma_db > 0.0:
        if rng is None:
            raise DomainViolation("shadowing requires a random generator")
        beta_db += shadow_sigma_db * rng.standard_normal()
    return float(10.0 ** (beta_db / 10.0))


def place_users(
    k_users: int,
    center_dist: float,
    radius: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Distances of users placed uniformly over a disk facing the array.

    The disk has the given radius and its center sits ``center_dist``
    from the receiver, so every returned distance lies in
    ``[center_dist - radius, center_dist + radius]``.
    """
    if k_users < 1:
        raise DomainViolation(f"k_users must be at least 1, got {k_users}")
    if radius < 0.0 or center_dist <= radius:
        raise DomainViolation(
            f"need center_dist > radius >= 0, got center_dist={center_dist}, radius={radius}"
        )
    radial = radius * np.sqrt(rng.uniform(size=k_users))
    azimuth = rng.uniform(0.0, 2.0 * np.pi, size=k_users)
    x = center_dist + radial * np.cos(azimuth)
    y = radial * np.sin(azimuth)
    return np.hypot(x, y)
