"""Multi-sensor atomic-vapor RF receiver simulator.

Library + CLI for simulating a multi-user uplink received by an array of
atomic-vapor RF sensors: four-level steady-state physics, optical
readout, correlated fading channels, linear combining, and Monte Carlo
ergodic-rate estimation validated against closed-form expressions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .channel import (
    ChannelSpec,
    CorrelationEigs,
    eig_correlation,
    jakes_correlation,
    large_scale_fading,
    place_users,
    sample_channel,
)
from .quantum import (
    AtomicConfig,
    DensityMatrix,
    build_hamiltonian,
    decay_rates,
    lindblad_residual,
    steady_state,
    susceptibility,
    susceptibility_derivative,
)
from .transduction import (
    OpticalConfig,
    QuantumReadout,
    linear_model_error,
    lo_phase_ramp,
    probe_output,
    readout,
    snr1_per_sensor,
    superposition_amplitude,
)

__all__ = [
    "__version__",
    "ChannelSpec",
    "CorrelationEigs",
    "eig_correlation",
    "jakes_correlation",
    "large_scale_fading",
    "place_users",
    "sample_channel",
    "AtomicConfig",
    "DensityMatrix",
    "build_hamiltonian",
    "decay_rates",
    "lindblad_residual",
    "steady_state",
    "susceptibility",
    "susceptibility_derivative",
    "OpticalConfig",
    "QuantumReadout",
    "linear_model_error",
    "lo_phase_ramp",
    "probe_output",
    "readout",
    "snr1_per_sensor",
    "superposition_amplitude",
]
