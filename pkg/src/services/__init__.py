"""
Services package for the secure ISAC beamforming toolkit.
Contains experiment orchestration and persistence, separated from the CLI.
"""

from .export_service import ExportService, SnrSweep, default_gap_rate_sweeps
from .experiment_service import (
    ExperimentService,
    ExperimentSpec,
    ExperimentResult,
    SweepSpec,
    TrialRecord,
    solve_variant,
)

# Export all services
__all__ = [
    "ExperimentService",
    "ExportService",
    "ExperimentSpec",
    "ExperimentResult",
    "SweepSpec",
    "TrialRecord",
    "SnrSweep",
    "default_gap_rate_sweeps",
    "solve_variant",
]
