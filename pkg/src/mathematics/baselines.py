"""
Comparison architectures derived from the main solver.

Every variant is a declarative set of transforms applied to a base
configuration and channel set, so all of them share one PDD/BSUM engine.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple, Union

from .numerics import ContractViolation
from .scenario import ChannelSet, SystemConfig
from .solver import PenaltyMode, SolverMode

logger = logging.getLogger(__name__)


class ArchitectureVariant(str, Enum):
    """Named benchmark architectures."""
    PROPOSED_HB = "proposed_hb"
    IRS_ISAC_FDB = "irs_isac_fdb"
    WOIRS_ISAC_FDB = "woirs_isac_fdb"
    IRS_C_HB = "irs_c_hb"
    IRS_C_FDB = "irs_c_fdb"
    WOIRS_C_HB = "woirs_c_hb"
    WOIRS_C_FDB = "woirs_c_fdb"
    RADAR_ONLY = "radar_only"
    SUBCONNECTED_HB = "subconnected_hb"


@dataclass(frozen=True)
class VariantTransforms:
    """What a variant changes relative to the base scenario."""
    fully_digital: bool = False  # N_RF = N_t with F fixed
    with_irs: bool = True
    mu_override: Optional[float] = None
    subconnected: bool = False
    description: str = ""


VARIANT_TRANSFORMS: Dict[ArchitectureVariant, VariantTransforms] = {
    ArchitectureVariant.PROPOSED_HB: VariantTransforms(
        description="Hybrid beamforming for IRS-assisted ISAC",
    ),
    ArchitectureVariant.IRS_ISAC_FDB: VariantTransforms(
        fully_digital=True,
        description="Fully digital beamforming for IRS-assisted ISAC",
    ),
    ArchitectureVariant.WOIRS_ISAC_FDB: VariantTransforms(
        fully_digital=True, with_irs=False,
        description="Fully digital ISAC without IRS",
    ),
    ArchitectureVariant.IRS_C_HB: VariantTransforms(
        mu_override=1.0,
        description="Hybrid beamforming, IRS-assisted, communication only",
    ),
    ArchitectureVariant.IRS_C_FDB: VariantTransforms(
        fully_digital=True, mu_override=1.0,
        description="Fully digital, IRS-assisted, communication only",
    ),
    ArchitectureVariant.WOIRS_C_HB: VariantTransforms(
        with_irs=False, mu_override=1.0,
        description="Hybrid beamforming without IRS, communication only",
    ),
    ArchitectureVariant.WOIRS_C_FDB: VariantTransforms(
        fully_digital=True, with_irs=False, mu_override=1.0,
        description="Fully digital without IRS, communication only",
    ),
    ArchitectureVariant.RADAR_ONLY: VariantTransforms(
        mu_override=0.0,
        description="Radar sensing only",
    ),
    ArchitectureVariant.SUBCONNECTED_HB: VariantTransforms(
        subconnected=True,
        description="Sub-connected hybrid beamforming for IRS-assisted ISAC",
    ),
}


def parse_variant(name: Union[str, ArchitectureVariant]) -> ArchitectureVariant:
    """Resolve a variant name, raising ValueError with the valid choices."""
    if isinstance(name, ArchitectureVariant):
        return name
    try:
        return ArchitectureVariant(name.strip().lower())
    except ValueError:
        choices = ", ".join(v.value for v in ArchitectureVariant)
        raise ValueError(f"Unknown variant '{name}'. Expected one of: {choices}") from None


def materialize_variant(
    variant: Union[str, ArchitectureVariant],
    base: SystemConfig,
    penalty_mode: PenaltyMode = PenaltyMode.FIXED_WEIGHT,
) -> Tuple[SystemConfig, SolverMode]:
    """
    Resolve a variant into a configuration and solver switches.

    Args:
        variant: Variant or its name
        base: Base scenario
        penalty_mode: Penalty weighting passed through to the solver

    Returns:
        (SystemConfig, SolverMode)

    Raises:
        ContractViolation: Sub-connected mapping with n_tx not divisible by n_rf
    """
    variant = parse_variant(variant)
    transforms = VARIANT_TRANSFORMS[variant]

    updates = {}
    if transforms.fully_digital:
        updates["n_rf"] = base.n_tx
    if transforms.mu_override is not None:
        updates["mu"] = transforms.mu_override
    cfg = base.with_updates(**updates) if updates else base

    if transforms.subconnected and cfg.n_tx % cfg.n_rf != 0:
        raise ContractViolation(
            f"{variant.value} needs n_tx ({cfg.n_tx}) divisible by n_rf ({cfg.n_rf})"
        )

    mode = SolverMode(
        fixed_analog=transforms.fully_digital,
        use_irs=transforms.with_irs,
        update_delta=cfg.mu < 1.0,
        update_phi=transforms.with_irs and cfg.mu > 0.0,
        subconnected=transforms.subconnected,
        penalty_mode=penalty_mode,
    )
    logger.debug(f"Materialized {variant.value}: n_rf={cfg.n_rf}, mu={cfg.mu}, mode={mode}")
    return cfg, mode


def variant_channels(variant: Union[str, ArchitectureVariant], ch: ChannelSet) -> ChannelSet:
    """Channels seen by a variant; the IRS links vanish for architectures without IRS."""
    variant = parse_variant(variant)
    if VARIANT_TRANSFORMS[variant].with_irs:
        return ch
    return ch.without_irs()


# Export public interface
__all__ = [
    "ArchitectureVariant",
    "VariantTransforms",
    "VARIANT_TRANSFORMS",
    "parse_variant",
    "materialize_variant",
    "variant_channels",
]
