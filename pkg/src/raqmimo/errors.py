"""Exception hierarchy and warnings for the receiver simulator.

Two error families matter to the CLI exit-code contract: configuration
problems (bad config files, out-of-domain parameters) and numerical
failures (singular systems, non-convergence).  Everything derives from
:class:`RaqmimoError` so callers can catch the whole package with one
``except`` clause.
"""

from __future__ import annotations


class RaqmimoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RaqmimoError):
    """A configuration file or parameter set is invalid."""


class DomainViolation(ConfigError):
    """An operation was called outside its mathematical domain."""


class ZeroProbe(DomainViolation):
    """The probe drive is zero, so the susceptibility is undefined."""


class DimensionMismatch(ConfigError):
    """Array arguments have incompatible shapes."""


class NumericalError(RaqmimoError):
    """A numerical procedure failed to produce a trustworthy result."""


class SingularSystem(NumericalError):
    """The steady-state linear system is rank-deficient (non-unique state)."""


class NonPhysical(NumericalError):
    """A computed density matrix has a meaningfully negative population."""


class SingularGram(NumericalError):
    """The combiner Gram matrix is numerically singular."""


class IndefiniteCorrelation(NumericalError):
    """A correlation matrix has an eigenvalue below the roundoff floor."""


class NoConvergence(NumericalError):
    """An iterative search exceeded its iteration budget."""


class DegenerateSlope(UserWarning):
    """The response slope is zero: the sensor gain collapses to zero.

    Emitted as a warning rather than an error so parameter sweeps that
    pass through a dead operating point stay total; downstream gain 0 is
    meaningful.
    """
