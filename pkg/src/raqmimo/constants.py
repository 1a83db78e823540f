"""Physical constants (SI units) shared across the package.

Values follow CODATA 2018; the exact-by-definition constants (speed of
light, Boltzmann, elementary charge) are written at full precision.
"""

from __future__ import annotations

import math

#: Reduced Planck constant [J s].
HBAR = 1.054571817e-34

#: Speed of light in vacuum [m/s] (exact).
C_LIGHT = 299792458.0

#: Vacuum permittivity [F/m].
EPS0 = 8.8541878128e-12

#: Boltzmann constant [J/K] (exact).
K_B = 1.380649e-23

#: Elementary charge [C] (exact).
E_CHARGE = 1.602176634e-19

#: Euler-Mascheroni constant, full double precision.
EULER_GAMMA = 0.57721566490153286

#: 2*pi, spelled once.
TWO_PI = 2.0 * math.pi


def db_to_linear(value_db: float) -> float:
    """Convert a power ratio from dB to linear scale."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear power ratio to dB."""
    if value <= 0.0:
        raise ValueError(f"dB conversion requires a positive ratio, got {value}")
    return 10.0 * math.log10(value)


def dbm_to_watt(value_dbm: float) -> float:
    """Convert a power from dBm to watts."""
    return 1e-3 * db_to_linear(value_dbm)
