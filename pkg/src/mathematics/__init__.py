"""
Mathematics package for the secure ISAC beamforming toolkit.
Contains the matrix kernel, scenario generation, metrics, majorization
surrogates, the PDD/BSUM solver and the benchmark architectures.
"""

from .numerics import (
    ContractViolation,
    DimensionError,
    NumericalFailure,
    hermitian_eig,
    max_eigenvalue,
)
from .scenario import (
    ChannelSet,
    DesiredBeampattern,
    SystemConfig,
    desired_beampattern,
    desired_from_config,
    generate_channels,
    link_gain,
    load_config,
    reference_snr,
    secrecy_weight,
    steering_vector,
)
from .metrics import (
    BeamformerState,
    al_value,
    beampattern_mse,
    effective_channels,
    secrecy_gap,
    secrecy_rate,
    transmit_beampattern,
)
from .solver import (
    PenaltyMode,
    SolveReport,
    SolverMode,
    SolverTrace,
    exterior_penalty,
    init_state,
    pdd_outer,
)
from .baselines import ArchitectureVariant, materialize_variant, variant_channels

# Export all mathematical functions and classes
__all__ = [
    # Errors
    "ContractViolation",
    "DimensionError",
    "NumericalFailure",

    # Linear algebra
    "hermitian_eig",
    "max_eigenvalue",

    # Scenario
    "ChannelSet",
    "DesiredBeampattern",
    "SystemConfig",
    "desired_beampattern",
    "desired_from_config",
    "generate_channels",
    "link_gain",
    "load_config",
    "reference_snr",
    "secrecy_weight",
    "steering_vector",

    # Metrics
    "BeamformerState",
    "al_value",
    "beampattern_mse",
    "effective_channels",
    "secrecy_gap",
    "secrecy_rate",
    "transmit_beampattern",

    # Solver
    "PenaltyMode",
    "SolveReport",
    "SolverMode",
    "SolverTrace",
    "exterior_penalty",
    "init_state",
    "pdd_outer",

    # Benchmarks
    "ArchitectureVariant",
    "materialize_variant",
    "variant_channels",
]
