"""
Experiment Service for the secure ISAC beamforming toolkit.
Runs Monte Carlo trials over architecture variants and parameter sweeps.
"""

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import stats

from ..config import settings
from ..mathematics.baselines import materialize_variant, parse_variant, variant_channels
from ..mathematics.scenario import (
    SystemConfig,
    apply_overrides,
    desired_from_config,
    generate_channels,
    load_config,
)
from ..mathematics.solver import PenaltyMode, SolveReport, SolverMode, exterior_penalty
from .export_service import AGGREGATE_METRICS, ExportService

logger = logging.getLogger(__name__)


class SweepSpec(BaseModel):
    """One swept scenario parameter in scenario-file key syntax."""
    model_config = ConfigDict(extra="forbid")

    parameter: str = Field(description="Scenario key, e.g. n_tx, mu, hyper__rho0, target_width_deg")
    values: List[float] = Field(min_length=1)


class ExperimentSpec(BaseModel):
    """Monte Carlo experiment definition, loaded from JSON."""
    model_config = ConfigDict(extra="forbid")

    name: str = Field(default="experiment", pattern=r"^[A-Za-z0-9_.-]+$")
    base_config: Optional[str] = Field(default=None, description="Scenario file, relative to the spec file")
    overrides: Dict[str, Any] = Field(default_factory=dict)
    sweep: Optional[SweepSpec] = None
    variants: List[str] = Field(default_factory=lambda: ["proposed_hb"], min_length=1)
    trials: int = Field(default=1, ge=1)
    seed_base: int = Field(default=0, ge=0)
    penalty_mode: PenaltyMode = PenaltyMode.FIXED_WEIGHT
    outputs: Optional[str] = None

    @field_validator("variants")
    @classmethod
    def validate_variants(cls, v):
        """Every variant must be a known architecture."""
        return [parse_variant(name).value for name in v]

    @model_validator(mode="after")
    def validate_sweep_parameter(self):
        """The sweep parameter must resolve to a scenario field."""
        if self.sweep is not None:
            first_value = {self.sweep.parameter: self.sweep.values[0]}
            apply_overrides(SystemConfig(), first_value)
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentSpec":
        """Load a spec and resolve base_config relative to the spec file."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise OSError(f"Cannot read experiment spec {path}: {e}") from e
        spec = cls.model_validate(raw)
        if spec.base_config is not None and not Path(spec.base_config).is_absolute():
            spec = spec.model_copy(update={"base_config": str(path.parent / spec.base_config)})
        return spec

    def base(self) -> SystemConfig:
        """Scenario before sweeping."""
        cfg = load_config(self.base_config) if self.base_config else SystemConfig()
        return apply_overrides(cfg, self.overrides) if self.overrides else cfg

    def sweep_points(self) -> List[Optional[float]]:
        return list(self.sweep.values) if self.sweep else [None]


@dataclass
class TrialRecord:
    """Outcome of one (variant, value, trial) solve."""
    variant: str
    value: Optional[float]
    trial: int
    seed: int
    secrecy_gap: float
    secrecy_rate: float
    beampattern_mse: float
    iterations_inner: int
    iterations_outer: int
    final_violation: float
    converged: bool
    wall_time: float
    error: str = ""

    @property
    def sort_key(self) -> Tuple[str, float, int]:
        return (self.variant, -math.inf if self.value is None else self.value, self.trial)


@dataclass
class ExperimentResult:
    """Trial records, aggregates and trend statistics of an experiment."""
    spec: ExperimentSpec
    records: List[TrialRecord]
    aggregates: List[Dict[str, Any]]
    trends: Dict[str, Dict[str, Optional[float]]]
    wall_time: float

    def records_for(self, variant: str) -> List[TrialRecord]:
        return [r for r in self.records if r.variant == variant]


@dataclass(frozen=True)
class _TrialTask:
    variant: str
    value: Optional[float]
    trial: int
    seed: int
    cfg: SystemConfig
    mode: SolverMode


def solve_variant(
    cfg: SystemConfig,
    variant: str,
    seed: int,
    penalty_mode: PenaltyMode = PenaltyMode.FIXED_WEIGHT,
    descent_tolerance: Optional[float] = None,
) -> Tuple[SolveReport, SystemConfig]:
    """
    Draw channels for a seed and solve one architecture variant.

    Returns:
        (SolveReport, materialized SystemConfig)
    """
    variant_cfg, mode = materialize_variant(variant, cfg, penalty_mode)
    mode = replace(mode, descent_tolerance=descent_tolerance or settings.numerical_tolerance)
    channels = variant_channels(variant, generate_channels(variant_cfg, seed))
    desired = desired_from_config(variant_cfg)
    report = exterior_penalty(channels, desired, variant_cfg, mode, seed=seed)
    return report, variant_cfg


def _run_trial(task: _TrialTask) -> TrialRecord:
    """Worker entry point; solver failures become failed records."""
    started = time.perf_counter()
    try:
        channels = variant_channels(task.variant, generate_channels(task.cfg, task.seed))
        desired = desired_from_config(task.cfg)
        report = exterior_penalty(channels, desired, task.cfg, task.mode, seed=task.seed)
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as e:
        logger.warning(f"Trial {task.variant}/{task.value}/{task.trial} failed: {e}")
        return TrialRecord(
            variant=task.variant, value=task.value, trial=task.trial, seed=task.seed,
            secrecy_gap=math.nan, secrecy_rate=math.nan, beampattern_mse=math.nan,
            iterations_inner=0, iterations_outer=0, final_violation=math.nan,
            converged=False, wall_time=time.perf_counter() - started,
            error=f"{type(e).__name__}: {e}",
        )

    m = report.metrics
    return TrialRecord(
        variant=task.variant,
        value=task.value,
        trial=task.trial,
        seed=task.seed,
        secrecy_gap=m["secrecy_gap"],
        secrecy_rate=m["secrecy_rate"],
        beampattern_mse=m["beampattern_mse"],
        iterations_inner=m["iterations_inner_total"],
        iterations_outer=m["iterations_outer"],
        final_violation=m["final_violation"],
        converged=report.converged,
        wall_time=time.perf_counter() - started,
    )


def _mean_and_stderr(values: List[float]) -> Tuple[float, float]:
    finite = np.asarray([v for v in values if np.isfinite(v)], dtype=float)
    if finite.size == 0:
        return math.nan, math.nan
    mean = float(np.mean(finite))
    if finite.size == 1:
        return mean, 0.0
    return mean, float(np.std(finite, ddof=1) / np.sqrt(finite.size))


def _spearman(x: List[float], y: List[float]) -> Optional[float]:
    pairs = [(a, b) for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b)]
    if len(pairs) < 3 or len({a for a, _ in pairs}) < 2 or len({b for _, b in pairs}) < 2:
        return None
    correlation, _ = stats.spearmanr([a for a, _ in pairs], [b for _, b in pairs])
    return None if not np.isfinite(correlation) else float(correlation)


class ExperimentService:
    """Service for Monte Carlo experiment execution."""

    def __init__(self, threads: int = 1, descent_tolerance: Optional[float] = None):
        """
        Initialize experiment service.

        Args:
            threads: Worker processes; 1 runs trials in-process
            descent_tolerance: Slack of the AL descent monitor, defaults to settings
        """
        if threads < 1:
            raise ValueError("threads must be at least 1")
        self.threads = threads
        self.descent_tolerance = descent_tolerance or settings.numerical_tolerance
        self.export_service = ExportService()

    def build_tasks(self, spec: ExperimentSpec) -> List[_TrialTask]:
        """Materialize every (variant, value, trial) job; invalid combinations raise here."""
        base = spec.base()
        tasks = []
        for variant in spec.variants:
            for value in spec.sweep_points():
                swept = base if value is None else apply_overrides(base, {spec.sweep.parameter: value})
                cfg, mode = materialize_variant(variant, swept, spec.penalty_mode)
                mode = replace(mode, descent_tolerance=self.descent_tolerance)
                for trial in range(spec.trials):
                    tasks.append(_TrialTask(
                        variant=variant, value=value, trial=trial,
                        seed=spec.seed_base + trial, cfg=cfg, mode=mode,
                    ))
        return tasks

    def run_experiment(self, spec: ExperimentSpec, out_dir: Optional[Union[str, Path]] = None) -> ExperimentResult:
        """
        Run all trials of an experiment and optionally persist the results.

        Args:
            spec: Experiment definition
            out_dir: Output directory, defaults to spec.outputs (nothing is written when both are unset)

        Returns:
            ExperimentResult with records sorted by (variant, value, trial)
        """
        started = time.perf_counter()
        tasks = self.build_tasks(spec)
        logger.info(
            f"Starting experiment '{spec.name}': {len(tasks)} trials, "
            f"{len(spec.variants)} variants, {self.threads} workers"
        )

        if self.threads == 1:
            records = [_run_trial(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=self.threads) as pool:
                records = list(pool.map(_run_trial, tasks))
        records.sort(key=lambda r: r.sort_key)

        aggregates = self.aggregate(records)
        result = ExperimentResult(
            spec=spec,
            records=records,
            aggregates=aggregates,
            trends=self.trends(aggregates, spec.variants),
            wall_time=time.perf_counter() - started,
        )
        failures = sum(1 for r in records if r.error)
        logger.info(f"Experiment '{spec.name}' completed in {result.wall_time:.1f}s with {failures} failed trials")

        target = out_dir if out_dir is not None else spec.outputs
        if target is not None:
            self.export_service.write_experiment(result, target)
        return result

    @staticmethod
    def aggregate(records: List[TrialRecord]) -> List[Dict[str, Any]]:
        """Mean and standard error of every metric per (variant, value)."""
        groups: Dict[Tuple[str, Optional[float]], List[TrialRecord]] = {}
        for record in records:
            groups.setdefault((record.variant, record.value), []).append(record)

        rows = []
        for (variant, value), group in groups.items():
            row: Dict[str, Any] = {"variant": variant, "value": value, "trials": len(group)}
            for metric in AGGREGATE_METRICS:
                mean, stderr = _mean_and_stderr([float(getattr(r, metric)) for r in group])
                row[f"{metric}_mean"] = mean
                row[f"{metric}_stderr"] = stderr
            row["converged_fraction"] = sum(r.converged for r in group) / len(group)
            rows.append(row)
        return rows

    @staticmethod
    def trends(aggregates: List[Dict[str, Any]], variants: List[str]) -> Dict[str, Dict[str, Optional[float]]]:
        """Spearman correlation of sweep value against mean rate and mean 1/MSE, per variant."""
        trends = {}
        for variant in variants:
            rows = [r for r in aggregates if r["variant"] == variant and r["value"] is not None]
            xs = [r["value"] for r in rows]
            rates = [r["secrecy_rate_mean"] for r in rows]
            inverse_mse = [1.0 / r["beampattern_mse_mean"] if r["beampattern_mse_mean"] > 0 else math.nan for r in rows]
            trends[variant] = {
                "secrecy_rate": _spearman(xs, rates),
                "inverse_mse": _spearman(xs, inverse_mse),
            }
        return trends


# Export public interface
__all__ = [
    "SweepSpec",
    "ExperimentSpec",
    "TrialRecord",
    "ExperimentResult",
    "ExperimentService",
    "solve_variant",
]
