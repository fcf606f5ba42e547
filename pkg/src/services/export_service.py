"""
Export Service for the secure ISAC beamforming toolkit.
Writes figure data and experiment results as CSV files and a JSON manifest.
"""

import csv
import json
import logging
import math
import platform
from dataclasses import asdict
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy

from .. import __version__
from ..mathematics.metrics import gap_from_snr, rate_from_snr, transmit_beampattern
from ..mathematics.scenario import DesiredBeampattern
from ..mathematics.solver import SolveReport, SolverTrace

if TYPE_CHECKING:
    from .experiment_service import ExperimentResult, TrialRecord

logger = logging.getLogger(__name__)

BEAMPATTERN_COLUMNS = ["theta_deg", "p_b", "delta_p_d"]
GAP_RATE_COLUMNS = ["sweep_id", "snr_b", "snr_e", "gap", "rate"]
TRACE_COLUMNS = ["outer_idx", "inner_idx", "al_value", "violation", "rho", "kappa", "dual_updated"]
TRIAL_COLUMNS = [
    "variant", "value", "trial", "seed", "secrecy_gap", "secrecy_rate", "beampattern_mse",
    "iterations_inner", "iterations_outer", "final_violation", "converged", "error",
]
AGGREGATE_METRICS = ["secrecy_gap", "secrecy_rate", "beampattern_mse", "iterations_inner", "iterations_outer"]
AGGREGATE_COLUMNS = (
    ["variant", "value", "trials"]
    + [f"{m}_{s}" for m in AGGREGATE_METRICS for s in ("mean", "stderr")]
    + ["converged_fraction"]
)


class SnrSweep(NamedTuple):
    """One curve of the secrecy gap versus secrecy rate relationship."""
    sweep_id: str
    snr_b: np.ndarray
    snr_e: np.ndarray


def default_gap_rate_sweeps(points: int = 100) -> List[SnrSweep]:
    """
    The three reference curves: Eve fixed, Bob fixed, and both rising with Bob faster.

    Args:
        points: Samples per curve

    Returns:
        List of SnrSweep
    """
    grid = np.linspace(1.0, 100.0, points)
    return [
        SnrSweep("fixed_snr_e", snr_b=grid, snr_e=np.ones(points)),
        SnrSweep("fixed_snr_b", snr_b=np.full(points, 100.0), snr_e=grid),
        SnrSweep("both_varying", snr_b=2.0 * grid, snr_e=grid),
    ]


def record_as_row(record: "TrialRecord") -> Dict[str, Any]:
    """CSV row of a trial record; wall time is kept out so reruns are byte-identical."""
    row = asdict(record)
    row.pop("wall_time")
    row["value"] = "" if record.value is None else record.value
    row["converged"] = int(record.converged)
    return row


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


class ExportService:
    """Service for persisting figure data and experiment results."""

    def _write_csv(self, path: Union[str, Path], columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
                writer.writeheader()
                writer.writerows(rows)
        except OSError as e:
            raise OSError(f"Failed to write {path}: {e}") from e
        logger.debug(f"Wrote {path}")
        return path

    def emit_beampattern(
        self,
        report: SolveReport,
        desired: DesiredBeampattern,
        path: Union[str, Path],
    ) -> Path:
        """
        Write the final transmit beampattern next to the scaled desired pattern.

        Args:
            report: Solve report whose FW is evaluated
            desired: Desired beampattern with its angle grid
            path: Output CSV path

        Returns:
            Path written
        """
        if not report.converged:
            logger.warning("Writing the beampattern of a non-converged solve")
        pattern = transmit_beampattern(report.state, desired.angles)
        scaled = report.state.delta * np.asarray(desired.values)
        rows = (
            {"theta_deg": float(np.rad2deg(theta)), "p_b": float(p), "delta_p_d": float(d)}
            for theta, p, d in zip(desired.angles, pattern, scaled)
        )
        return self._write_csv(path, BEAMPATTERN_COLUMNS, rows)

    def emit_fig3_sweep(self, path: Union[str, Path], sweeps: Optional[List[SnrSweep]] = None) -> Path:
        """
        Write secrecy gap and secrecy rate along SNR sweeps.

        Args:
            path: Output CSV path
            sweeps: Curves to evaluate, defaults to default_gap_rate_sweeps()

        Returns:
            Path written
        """
        sweeps = sweeps if sweeps is not None else default_gap_rate_sweeps()
        rows = []
        for sweep in sweeps:
            if len(sweep.snr_b) != len(sweep.snr_e):
                raise ValueError(f"Sweep {sweep.sweep_id} has mismatched SNR lengths")
            for snr_b, snr_e in zip(sweep.snr_b, sweep.snr_e):
                rows.append({
                    "sweep_id": sweep.sweep_id,
                    "snr_b": float(snr_b),
                    "snr_e": float(snr_e),
                    "gap": gap_from_snr(float(snr_b), float(snr_e)),
                    "rate": rate_from_snr(float(snr_b), float(snr_e)),
                })
        return self._write_csv(path, GAP_RATE_COLUMNS, rows)

    def emit_trace(self, trace: SolverTrace, path: Union[str, Path]) -> Path:
        """Write one row per inner BSUM iteration."""
        return self._write_csv(path, TRACE_COLUMNS, trace.rows())

    def write_experiment(self, result: "ExperimentResult", out_dir: Union[str, Path]) -> Dict[str, Path]:
        """
        Persist an experiment: one CSV per variant, an aggregate CSV and manifest.json.

        Args:
            result: Experiment result
            out_dir: Output directory (created if missing)

        Returns:
            Mapping of artifact name to path
        """
        out_dir = Path(out_dir)
        spec = result.spec
        written: Dict[str, Path] = {}

        for variant in spec.variants:
            rows = [record_as_row(r) for r in result.records_for(variant)]
            written[variant] = self._write_csv(out_dir / f"{spec.name}_{variant}.csv", TRIAL_COLUMNS, rows)

        aggregate_rows = [
            {**row, "value": "" if row["value"] is None else row["value"]}
            for row in result.aggregates
        ]
        written["aggregate"] = self._write_csv(out_dir / f"{spec.name}_aggregate.csv", AGGREGATE_COLUMNS, aggregate_rows)

        manifest = {
            "name": spec.name,
            "version": __version__,
            "spec": spec.model_dump(mode="json"),
            "seeds": sorted({r.seed for r in result.records}),
            "trials_total": len(result.records),
            "failures": [
                {"variant": r.variant, "value": r.value, "trial": r.trial, "error": r.error}
                for r in result.records if r.error
            ],
            "trends": result.trends,
            "software": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "timings": {
                "wall_time": result.wall_time,
                "trials": [
                    {"variant": r.variant, "value": r.value, "trial": r.trial, "wall_time": r.wall_time}
                    for r in result.records
                ],
            },
        }
        path = out_dir / "manifest.json"
        try:
            path.write_text(json.dumps(_json_safe(manifest), indent=2), encoding="utf-8")
        except OSError as e:
            raise OSError(f"Failed to write {path}: {e}") from e
        written["manifest"] = path

        logger.info(f"Wrote {len(written)} artifacts to {out_dir}")
        return written


# Export public interface
__all__ = [
    "BEAMPATTERN_COLUMNS",
    "GAP_RATE_COLUMNS",
    "TRACE_COLUMNS",
    "TRIAL_COLUMNS",
    "AGGREGATE_COLUMNS",
    "SnrSweep",
    "default_gap_rate_sweeps",
    "record_as_row",
    "ExportService",
]
