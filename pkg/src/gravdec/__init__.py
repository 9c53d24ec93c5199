"""Gravitational time-dilation decoherence and broadcast-structure diagnostics."""

from ._kernels import BACKEND
from .core import PhysicalConstants, Scenario, phase, redshifted_frequency
from .decoherence import (
    coherence_length,
    decoherence_time,
    gamma_fraction,
    gamma_mode_complex,
    gamma_mode_exact,
    gamma_mode_oracle,
    gamma_short_time,
    short_time_valid,
)
from .distinguish import (
    bhattacharyya,
    distinguishability_length,
    distinguishability_time,
    fidelity_macrofraction,
    fidelity_mode_exact,
    fidelity_oracle,
    fidelity_short_time,
    qfi_regime_valid,
)
from .ensemble import (
    EnvironmentPartition,
    FrequencyDistribution,
    StateTemplate,
    SweepResult,
    mean_qfi,
    mean_variance,
    run_sweep,
    sample_partition,
)
from .sbsdiag import DiscreteExtendedState, build_extended, sbs_distance
from .states import (
    DisplacedThermal,
    FockMatrix,
    ModeSpec,
    energy_variance,
    nbar_from_temperature,
    qfi,
    qfi_generic,
    to_fock,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DiscreteExtendedState",
    "DisplacedThermal",
    "EnvironmentPartition",
    "FockMatrix",
    "FrequencyDistribution",
    "ModeSpec",
    "PhysicalConstants",
    "Scenario",
    "StateTemplate",
    "SweepResult",
    "bhattacharyya",
    "build_extended",
    "coherence_length",
    "decoherence_time",
    "distinguishability_length",
    "distinguishability_time",
    "energy_variance",
    "fidelity_macrofraction",
    "fidelity_mode_exact",
    "fidelity_oracle",
    "fidelity_short_time",
    "gamma_fraction",
    "gamma_mode_complex",
    "gamma_mode_exact",
    "gamma_mode_oracle",
    "gamma_short_time",
    "mean_qfi",
    "mean_variance",
    "nbar_from_temperature",
    "phase",
    "qfi",
    "qfi_generic",
    "qfi_regime_valid",
    "redshifted_frequency",
    "run_sweep",
    "sample_partition",
    "sbs_distance",
    "short_time_valid",
    "to_fock",
]
