"""
Simulation world for the IRS-assisted ISAC system.
Holds the scenario configuration, seeded channel generation with path loss,
ULA steering vectors and the desired radar beampattern.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .numerics import DimensionError

logger = logging.getLogger(__name__)

# Sub-stream order of the channel generator; changing it changes every figure.
CHANNEL_LINKS: Tuple[str, ...] = ("ab", "ai", "ae", "ib", "ie")
# Links that end at a receiver and are whitened by its noise power.
RECEIVER_LINKS: Tuple[str, ...] = ("ab", "ae", "ib", "ie")
IRS_LINKS: Tuple[str, ...] = ("ai", "ib", "ie")
NESTED_DELIMITER = "__"
DEGREE_SUFFIX = "_deg"


def _default_angle_grid() -> Tuple[float, ...]:
    return tuple(np.deg2rad(np.arange(-90.0, 91.0, 1.0)).tolist())


class Distances(BaseModel):
    """Link distances in meters."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    ab: float = Field(default=80.0, gt=0, description="BS to Bob")
    ai: float = Field(default=30.0, gt=0, description="BS to IRS")
    ae: float = Field(default=80.0, gt=0, description="BS to Eve")
    ib: float = Field(default=40.0, gt=0, description="IRS to Bob")
    ie: float = Field(default=40.0, gt=0, description="IRS to Eve")


class ToleranceSchedule(str, Enum):
    """How the PDD outer loop tightens the inner BSUM tolerance."""
    GEOMETRIC = "geometric"
    VIOLATION = "violation"


class SecrecyScaling(str, Enum):
    """Normalization of the secrecy term in the weighted objective."""
    REFERENCE_SNR = "reference_snr"
    NONE = "none"


class HyperParams(BaseModel):
    """Penalty, PDD and BSUM loop parameters."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    varsigma: float = Field(default=1.1, description="Penalty growth factor ς")
    rho0: float = Field(default=0.1, gt=0, description="Initial AL penalty parameter ρ")
    kappa0: float = Field(default=0.9, gt=0, description="Initial dual-update threshold κ")
    eps_inner: float = Field(default=1e-3, gt=0, description="Initial relative AL-change tolerance ε of the inner loop")
    eps_stop: float = Field(default=1e-5, gt=0, description="Equality-violation stopping tolerance")
    c_shrink: float = Field(default=0.7, description="Penalty shrink factor c")
    max_inner_iters: int = Field(default=200, ge=1)
    max_outer_iters: int = Field(default=50, ge=1)
    max_penalty_rounds: int = Field(default=20, ge=1)
    penalty_target: float = Field(default=1e-3, gt=0, description="Radar MSE target of the exterior penalty")
    tolerance_schedule: ToleranceSchedule = Field(
        default=ToleranceSchedule.GEOMETRIC,
        description="geometric: ε ← max(0.9ε, eps_stop) each outer round; violation: ε tracks 0.9·‖Q − FW‖_∞",
    )

    @field_validator("varsigma")
    @classmethod
    def validate_varsigma(cls, v):
        """Penalty growth must be expansive."""
        if v <= 1.0:
            raise ValueError("varsigma must be greater than 1")
        return v

    @field_validator("c_shrink")
    @classmethod
    def validate_c_shrink(cls, v):
        """Shrink factor must lie strictly inside (0, 1)."""
        if not 0.0 < v < 1.0:
            raise ValueError("c_shrink must lie in (0, 1)")
        return v


class SystemConfig(BaseModel):
    """Scenario and solver configuration of one IRS-ISAC instance."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_tx: int = Field(default=10, ge=1, description="Transmit antennas N_t")
    n_rf: int = Field(default=4, ge=1, description="RF chains N_RF")
    n_streams: int = Field(default=2, ge=1, description="Data streams M")
    n_irs: int = Field(default=32, ge=1, description="IRS elements N_i")
    n_bob: int = Field(default=4, ge=1, description="Bob antennas N_b")
    n_eve: int = Field(default=4, ge=1, description="Eve antennas N_e")
    p_max: float = Field(default=1.0, gt=0, description="Transmit power budget (linear)")
    mu: float = Field(default=0.5, ge=0.0, le=1.0, description="Secrecy/radar trade-off weight")
    angle_grid: Tuple[float, ...] = Field(default_factory=_default_angle_grid, description="Sampled angles θ_k (rad)")
    target_centers: Tuple[float, ...] = Field(
        default_factory=lambda: tuple(np.deg2rad([-40.0, 0.0, 40.0]).tolist()),
        description="Radar target directions (rad)",
    )
    target_width: float = Field(default=float(np.deg2rad(20.0)), ge=0.0, description="Beam width Δθ (rad)")
    distances: Distances = Field(default_factory=Distances)
    pathloss_ref_db: float = Field(default=-30.0, description="Path loss at 1 m (dB)")
    pathloss_exponent: float = Field(default=3.5, gt=0, description="Path loss exponent of the direct links")
    irs_pathloss_exponent: Optional[float] = Field(
        default=2.0, gt=0, description="Path loss exponent of the IRS links; None reuses pathloss_exponent"
    )
    noise_power_db: float = Field(default=-100.0, description="Receiver noise power σ² (dB, same unit as p_max)")
    secrecy_scaling: SecrecyScaling = Field(
        default=SecrecyScaling.REFERENCE_SNR,
        description="Divide the secrecy gap by the reference SNR so it is commensurate with the radar MSE",
    )
    hyper: HyperParams = Field(default_factory=HyperParams)

    @field_validator("angle_grid")
    @classmethod
    def validate_angle_grid(cls, v):
        """Angle grid must be non-empty, ascending and inside [−π/2, π/2]."""
        grid = np.asarray(v, dtype=float)
        if grid.size == 0:
            raise ValueError("angle_grid must not be empty")
        if np.any(np.diff(grid) < 0):
            raise ValueError("angle_grid must be sorted ascending")
        if grid[0] < -np.pi / 2 - 1e-12 or grid[-1] > np.pi / 2 + 1e-12:
            raise ValueError("angle_grid must lie within [-90°, 90°]")
        return v

    @field_validator("target_centers")
    @classmethod
    def validate_targets(cls, v):
        """At least one radar target is required."""
        if len(v) == 0:
            raise ValueError("target_centers must not be empty")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self):
        """Hybrid beamforming needs N_t ≥ N_RF ≥ M."""
        if self.n_rf > self.n_tx:
            raise ValueError(f"n_rf ({self.n_rf}) must not exceed n_tx ({self.n_tx})")
        if self.n_streams > self.n_rf:
            raise ValueError(f"n_streams ({self.n_streams}) must not exceed n_rf ({self.n_rf})")
        return self

    @property
    def n_angles(self) -> int:
        """Number of sampled angles K."""
        return len(self.angle_grid)

    def angles(self) -> np.ndarray:
        """Angle grid as an array in radians."""
        return np.asarray(self.angle_grid, dtype=float)

    def with_updates(self, **updates) -> "SystemConfig":
        """Return a re-validated copy with top-level fields replaced."""
        data = self.model_dump()
        data.update(updates)
        return SystemConfig.model_validate(data)


@dataclass(frozen=True)
class ChannelSet:
    """The five channel matrices of the IRS-ISAC link budget."""
    h_ab: np.ndarray  # N_b × N_t
    h_ae: np.ndarray  # N_e × N_t
    h_ai: np.ndarray  # N_i × N_t
    h_ib: np.ndarray  # N_b × N_i
    h_ie: np.ndarray  # N_e × N_i

    def validate(self, cfg: SystemConfig) -> "ChannelSet":
        """Check shapes against a configuration and finiteness of entries."""
        expected = {
            "h_ab": (cfg.n_bob, cfg.n_tx),
            "h_ae": (cfg.n_eve, cfg.n_tx),
            "h_ai": (cfg.n_irs, cfg.n_tx),
            "h_ib": (cfg.n_bob, cfg.n_irs),
            "h_ie": (cfg.n_eve, cfg.n_irs),
        }
        for name, shape in expected.items():
            matrix = getattr(self, name)
            if matrix.shape != shape:
                raise DimensionError(f"{name} has shape {matrix.shape}, expected {shape}")
            if not np.all(np.isfinite(matrix)):
                raise ValueError(f"{name} contains non-finite entries")
        return self

    def without_irs(self) -> "ChannelSet":
        """Copy with every IRS link zeroed."""
        return ChannelSet(
            h_ab=self.h_ab,
            h_ae=self.h_ae,
            h_ai=_frozen(np.zeros_like(self.h_ai)),
            h_ib=_frozen(np.zeros_like(self.h_ib)),
            h_ie=_frozen(np.zeros_like(self.h_ie)),
        )


@dataclass(frozen=True)
class DesiredBeampattern:
    """Indicator beampattern P_d(θ_k) over the angle grid."""
    targets: Tuple[Tuple[float, float], ...]  # (center, width) in radians
    angles: np.ndarray  # K grid angles in radians
    values: np.ndarray  # K reals in {0, 1}

    @property
    def n_angles(self) -> int:
        return int(self.values.size)

    @property
    def energy(self) -> float:
        """Σ_k P_d(θ_k)²."""
        return float(np.sum(self.values ** 2))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def steering_vector(theta: float, n: int) -> np.ndarray:
    """
    ULA steering vector with half-wavelength spacing.

    Args:
        theta: Direction in radians
        n: Antenna count

    Returns:
        Length-n vector with entries exp(jπ m sin θ)
    """
    if n < 1:
        raise DimensionError("Steering vector needs at least one antenna")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(theta))


def steering_matrix(angles: Iterable[float], n: int) -> np.ndarray:
    """Stack steering vectors column-wise into an n×K matrix."""
    if n < 1:
        raise DimensionError("Steering matrix needs at least one antenna")
    angles = np.asarray(list(angles), dtype=float)
    return np.exp(1j * np.pi * np.outer(np.arange(n), np.sin(angles)))


def pathloss(distance: float, ref_db: float, exponent: float) -> float:
    """Large-scale power gain PL(d) = 10^(ref/10) · d^(−exponent)."""
    return 10.0 ** (ref_db / 10.0) * distance ** (-exponent)


def link_gain(cfg: SystemConfig, link: str) -> float:
    """
    Per-entry variance of one generated channel matrix.

    Links ending at Bob or Eve are divided by the receiver noise power, so
    ‖H q‖² is an SNR directly. The BS-IRS link is left in physical units.

    Args:
        cfg: Scenario configuration
        link: One of CHANNEL_LINKS

    Returns:
        PL(d_link) / σ² for receiver links, PL(d_link) otherwise
    """
    if link not in CHANNEL_LINKS:
        raise ValueError(f"Unknown channel link '{link}'")
    exponent = cfg.pathloss_exponent
    if link in IRS_LINKS and cfg.irs_pathloss_exponent is not None:
        exponent = cfg.irs_pathloss_exponent
    gain = pathloss(getattr(cfg.distances, link), cfg.pathloss_ref_db, exponent)
    if link in RECEIVER_LINKS:
        gain /= 10.0 ** (cfg.noise_power_db / 10.0)
    return gain


def reference_snr(cfg: SystemConfig) -> float:
    """
    Average Bob SNR of an isotropic full-power transmission.

    P_max · N_b · (g_ab + N_i · g_ai · g_ib), with g the link gains above.
    """
    direct = link_gain(cfg, "ab")
    reflected = cfg.n_irs * link_gain(cfg, "ai") * link_gain(cfg, "ib")
    return cfg.p_max * cfg.n_bob * (direct + reflected)


def secrecy_weight(cfg: SystemConfig) -> float:
    """Weight of SNR_e − SNR_b in the objective: μ, divided by the reference SNR unless scaling is off."""
    if cfg.secrecy_scaling == SecrecyScaling.NONE:
        return cfg.mu
    return cfg.mu / reference_snr(cfg)


def generate_channels(cfg: SystemConfig, seed: int) -> ChannelSet:
    """
    Draw Rayleigh-faded channels scaled by link_gain.

    One child stream of ``numpy.random.SeedSequence(seed)`` feeds each link in
    the order ab, ai, ae, ib, ie; entries are (x + jy)/√2 with x, y ~ N(0, 1).

    Args:
        cfg: Scenario configuration
        seed: Non-negative integer seed

    Returns:
        Read-only ChannelSet
    """
    shapes = {
        "ab": (cfg.n_bob, cfg.n_tx),
        "ai": (cfg.n_irs, cfg.n_tx),
        "ae": (cfg.n_eve, cfg.n_tx),
        "ib": (cfg.n_bob, cfg.n_irs),
        "ie": (cfg.n_eve, cfg.n_irs),
    }
    children = np.random.SeedSequence(seed).spawn(len(CHANNEL_LINKS))
    matrices: Dict[str, np.ndarray] = {}

    for link, child in zip(CHANNEL_LINKS, children):
        rng = np.random.default_rng(child)
        shape = shapes[link]
        small_scale = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        matrices[link] = _frozen(np.sqrt(link_gain(cfg, link)) * small_scale)

    return ChannelSet(
        h_ab=matrices["ab"],
        h_ae=matrices["ae"],
        h_ai=matrices["ai"],
        h_ib=matrices["ib"],
        h_ie=matrices["ie"],
    )


def desired_beampattern(
    targets: Iterable[Tuple[float, float]],
    angle_grid: Iterable[float],
) -> DesiredBeampattern:
    """
    Build the indicator pattern over the targets.

    Args:
        targets: (center, width) pairs in radians
        angle_grid: Sorted angles in radians

    Returns:
        DesiredBeampattern with values 1 inside any target window and 0 elsewhere
    """
    targets = tuple((float(c), float(w)) for c, w in targets)
    if not targets:
        raise ValueError("At least one radar target is required")

    grid = np.asarray(list(angle_grid), dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("angle_grid must be sorted ascending")

    # Absorb the rounding of degree-to-radian conversion at window edges.
    slack = 1e-9
    values = np.zeros(grid.size)
    for center, width in targets:
        inside = np.abs(grid - center) <= width / 2.0 + slack
        values[inside] = 1.0

    if not np.any(values):
        raise ValueError("Desired beampattern has no grid point inside any target window")
    return DesiredBeampattern(targets=targets, angles=_frozen(grid.copy()), values=_frozen(values))


def desired_from_config(cfg: SystemConfig) -> DesiredBeampattern:
    """Desired pattern for the targets and grid carried by a configuration."""
    return desired_beampattern(
        [(center, cfg.target_width) for center in cfg.target_centers],
        cfg.angle_grid,
    )


def _parse_list(raw: str) -> List[float]:
    raw = raw.strip()
    if ":" in raw:
        parts = [float(p) for p in raw.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"Range must be start:stop:step with positive step, got '{raw}'")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(p) for p in raw.split(",") if p.strip()]


def _normalize_keys(raw: Mapping[str, object]) -> Dict[str, object]:
    """Translate flat scenario keys into the nested SystemConfig layout."""
    data: Dict[str, Union[object, Dict[str, object]]] = {}
    list_fields = {"angle_grid", "target_centers"}

    for key, value in raw.items():
        if value is None:
            raise ValueError(f"Key '{key}' has no value")
        key = key.strip().lower()

        if key == "p_max_db":
            data["p_max"] = 10.0 ** (float(value) / 10.0)
            continue

        if NESTED_DELIMITER in key:
            parent, child = key.split(NESTED_DELIMITER, 1)
            data.setdefault(parent, {})
            if not isinstance(data[parent], dict):
                raise ValueError(f"Key '{parent}' cannot be both flat and nested")
            data[parent][child] = value
            continue

        if key.endswith(DEGREE_SUFFIX):
            field = key[: -len(DEGREE_SUFFIX)]
            if field in list_fields:
                parsed = value if not isinstance(value, str) else _parse_list(value)
                data[field] = tuple(np.deg2rad(parsed).tolist())
            else:
                data[field] = float(np.deg2rad(float(value)))
            continue

        if key in list_fields and isinstance(value, str):
            data[key] = tuple(_parse_list(value))
            continue

        data[key] = value

    return data


def config_from_mapping(raw: Mapping[str, object]) -> SystemConfig:
    """
    Build a SystemConfig from a flat key-value mapping.

    Nested fields use ``__`` (``distances__ab``), degree-valued fields use a
    ``_deg`` suffix and ``p_max_db`` may replace ``p_max``.

    Args:
        raw: Mapping of string keys to string (or already typed) values

    Returns:
        Validated SystemConfig
    """
    return SystemConfig.model_validate(_normalize_keys(raw))


def apply_overrides(cfg: SystemConfig, raw: Mapping[str, object]) -> SystemConfig:
    """
    Replace fields of an existing configuration using flat scenario keys.

    Args:
        cfg: Base configuration
        raw: Flat overrides in the scenario-file key syntax

    Returns:
        Re-validated SystemConfig
    """
    data = cfg.model_dump()
    for key, value in _normalize_keys(raw).items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return SystemConfig.model_validate(data)


def load_config(path: Union[str, Path]) -> SystemConfig:
    """
    Load a scenario file of ``key=value`` lines.

    Args:
        path: Path to the UTF-8 scenario file

    Returns:
        Validated SystemConfig
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    raw = dotenv_values(path, encoding="utf-8")
    logger.debug(f"Loaded {len(raw)} scenario keys from {path}")
    return config_from_mapping(raw)


# Export public interface
__all__ = [
    "CHANNEL_LINKS",
    "RECEIVER_LINKS",
    "IRS_LINKS",
    "ToleranceSchedule",
    "SecrecyScaling",
    "Distances",
    "HyperParams",
    "SystemConfig",
    "ChannelSet",
    "DesiredBeampattern",
    "steering_vector",
    "steering_matrix",
    "pathloss",
    "link_gain",
    "reference_snr",
    "secrecy_weight",
    "generate_channels",
    "desired_beampattern",
    "desired_from_config",
    "config_from_mapping",
    "apply_overrides",
    "load_config",
]
