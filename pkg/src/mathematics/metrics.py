"""
Evaluation quantities of the IRS-ISAC beamformer.
Effective channels, secrecy gap and rate, transmit beampattern, beampattern MSE
and the augmented Lagrangian minimized by the solver.
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .numerics import DimensionError, ContractViolation
from .scenario import ChannelSet, DesiredBeampattern, SystemConfig, secrecy_weight, steering_matrix

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOLERANCE = 1e-12
POWER_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BeamformerState:
    """All optimization variables of one PDD iterate."""
    delta: float  # radar scaling δ
    f_analog: np.ndarray  # N_t × N_RF, unit modulus (zeros allowed off the sub-connected mask)
    w_digital: np.ndarray  # N_RF × M
    q_aux: np.ndarray  # N_t × M, auxiliary copy of FW
    phi: np.ndarray  # N_i IRS phases, unit modulus
    psi_dual: np.ndarray  # N_t × M dual variable Ψ
    rho: float  # penalty parameter ρ

    @property
    def fw(self) -> np.ndarray:
        """Hybrid precoder F·W."""
        return self.f_analog @ self.w_digital

    @property
    def violation(self) -> float:
        """Equality-constraint residual ‖Q − FW‖_∞ (largest entry modulus)."""
        return float(np.max(np.abs(self.q_aux - self.fw)))

    def evolve(self, **changes) -> "BeamformerState":
        """Return a copy with some variables replaced."""
        return replace(self, **changes)

    def validate(self, cfg: SystemConfig, subconnected: bool = False) -> "BeamformerState":
        """
        Check shapes and feasibility against a configuration.

        Args:
            cfg: Scenario configuration
            subconnected: Allow structural zeros in the analog precoder

        Returns:
            The state itself

        Raises:
            DimensionError: On a shape mismatch
            ContractViolation: On a broken modulus or power constraint
        """
        expected = {
            "f_analog": (cfg.n_tx, cfg.n_rf),
            "w_digital": (cfg.n_rf, cfg.n_streams),
            "q_aux": (cfg.n_tx, cfg.n_streams),
            "psi_dual": (cfg.n_tx, cfg.n_streams),
            "phi": (cfg.n_irs,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DimensionError(f"{name} has shape {actual}, expected {shape}")

        moduli = np.abs(self.f_analog)
        if subconnected:
            moduli = moduli[moduli > 0.5]
        if np.any(np.abs(moduli - 1.0) > UNIT_MODULUS_TOLERANCE):
            raise ContractViolation("Analog precoder entries are not unit modulus")
        if np.any(np.abs(np.abs(self.phi) - 1.0) > UNIT_MODULUS_TOLERANCE):
            raise ContractViolation("IRS phases are not unit modulus")
        if np.linalg.norm(self.q_aux) ** 2 > cfg.p_max + POWER_TOLERANCE:
            raise ContractViolation("Auxiliary precoder exceeds the power budget")
        if self.rho <= 0:
            raise ContractViolation(f"Penalty parameter must be positive, got {self.rho}")
        return self


class EffectiveChannels(NamedTuple):
    """Bob and Eve channels seen through the IRS."""
    h_bob_eff: np.ndarray  # N_b × N_t
    h_eve_eff: np.ndarray  # N_e × N_t


def effective_channels(ch: ChannelSet, phi: np.ndarray) -> EffectiveChannels:
    """
    Compose direct and reflected paths: H(Φ) = H_direct + H_irs Φ H_ai.

    Args:
        ch: Channel matrices
        phi: IRS reflection coefficients (length N_i)

    Returns:
        EffectiveChannels for Bob and Eve
    """
    phi = np.asarray(phi)
    n_irs = ch.h_ai.shape[0]
    if phi.shape != (n_irs,):
        raise DimensionError(f"phi has shape {phi.shape}, expected ({n_irs},)")
    if ch.h_ib.shape[1] != n_irs or ch.h_ie.shape[1] != n_irs:
        raise DimensionError("IRS dimension of H_ib/H_ie does not match H_ai")

    # Scaling the rows of H_ai by φ is H_ai premultiplied by diag(φ).
    reflected = phi[:, None] * ch.h_ai
    return EffectiveChannels(
        h_bob_eff=ch.h_ab + ch.h_ib @ reflected,
        h_eve_eff=ch.h_ae + ch.h_ie @ reflected,
    )


def snr_pair(ch: ChannelSet, state: BeamformerState, use_q: bool = False) -> Tuple[float, float]:
    """
    Received SNRs of Bob and Eve under unit noise power.

    Args:
        ch: Channel matrices
        state: Beamformer iterate
        use_q: Evaluate with Q in place of FW

    Returns:
        (SNR_b, SNR_e)
    """
    eff = effective_channels(ch, state.phi)
    x = state.q_aux if use_q else state.fw
    snr_b = float(np.linalg.norm(eff.h_bob_eff @ x) ** 2)
    snr_e = float(np.linalg.norm(eff.h_eve_eff @ x) ** 2)
    return snr_b, snr_e


def gap_from_snr(snr_b: float, snr_e: float) -> float:
    """[SNR_b − SNR_e]⁺."""
    return max(0.0, snr_b - snr_e)


def rate_from_snr(snr_b: float, snr_e: float) -> float:
    """[log₂(1 + SNR_b) − log₂(1 + SNR_e)]⁺ in bits per channel use."""
    return max(0.0, float(np.log2(1.0 + snr_b) - np.log2(1.0 + snr_e)))


def secrecy_gap(ch: ChannelSet, state: BeamformerState) -> float:
    """Secrecy gap of the hybrid precoder FW."""
    return gap_from_snr(*snr_pair(ch, state))


def secrecy_rate(ch: ChannelSet, state: BeamformerState) -> float:
    """Secrecy rate of the hybrid precoder FW."""
    return rate_from_snr(*snr_pair(ch, state))


def beampattern_of(x: np.ndarray, steering: np.ndarray) -> np.ndarray:
    """
    P_b(θ_k) = ‖xᴴ a(θ_k)‖² for every steering column.

    Args:
        x: N_t × M beamformer matrix
        steering: N_t × K steering matrix

    Returns:
        K nonnegative reals
    """
    if x.shape[0] != steering.shape[0]:
        raise DimensionError(f"Beamformer has {x.shape[0]} rows, steering has {steering.shape[0]}")
    projections = x.conj().T @ steering
    return np.sum(np.abs(projections) ** 2, axis=0)


def transmit_beampattern(
    state: BeamformerState,
    angle_grid: np.ndarray,
    use_q: bool = False,
    steering: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Transmit beampattern aᴴ(θ) FWWᴴFᴴ a(θ) over an angle grid.

    Args:
        state: Beamformer iterate
        angle_grid: Angles in radians
        use_q: Use Q instead of FW (the form inside the penalized objective)
        steering: Precomputed steering matrix for angle_grid

    Returns:
        K nonnegative reals
    """
    x = state.q_aux if use_q else state.fw
    if steering is None:
        steering = steering_matrix(angle_grid, x.shape[0])
    return beampattern_of(x, steering)


def beampattern_mse(
    delta: float,
    x: np.ndarray,
    desired: DesiredBeampattern,
    steering: Optional[np.ndarray] = None,
) -> float:
    """
    Mean squared deviation between δ·P_d and the beampattern of x.

    Args:
        delta: Radar scaling factor δ
        x: Beamformer matrix (FW or Q)
        desired: Desired beampattern with its angle grid
        steering: Precomputed steering matrix for desired.angles

    Returns:
        (1/K) Σ_k |δ P_d(θ_k) − P_b(θ_k)|²
    """
    if steering is None:
        steering = steering_matrix(desired.angles, x.shape[0])
    pattern = beampattern_of(x, steering)
    return float(np.mean((delta * desired.values - pattern) ** 2))


def al_value(
    state: BeamformerState,
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    radar_multiplier: float = 1.0,
    steering: Optional[np.ndarray] = None,
) -> float:
    """
    Augmented Lagrangian of the penalized problem.

    μs(‖H_e(Φ)Q‖² − ‖H_b(Φ)Q‖²) + ω(1−μ)·MSE(δ, Q) + Re Tr{Ψᴴ(Q − FW)} + (1/2ρ)‖Q − FW‖²,
    where ω is the radar multiplier of the escalating exterior penalty (1 otherwise)
    and s the secrecy scale of secrecy_weight (1/reference SNR, or 1 when disabled).

    Args:
        state: Beamformer iterate
        ch: Channel matrices
        desired: Desired beampattern
        cfg: Scenario configuration (supplies μ)
        radar_multiplier: Radar weight multiplier ω
        steering: Precomputed steering matrix

    Returns:
        AL value
    """
    secrecy = 0.0
    if cfg.mu > 0.0:
        snr_b, snr_e = snr_pair(ch, state, use_q=True)
        secrecy = secrecy_weight(cfg) * (snr_e - snr_b)

    radar = 0.0
    radar_weight = radar_multiplier * (1.0 - cfg.mu)
    if radar_weight > 0.0:
        radar = radar_weight * beampattern_mse(state.delta, state.q_aux, desired, steering)

    residual = state.q_aux - state.fw
    dual = float(np.real(np.vdot(state.psi_dual, residual)))
    penalty = float(np.linalg.norm(residual) ** 2) / (2.0 * state.rho)
    return secrecy + radar + dual + penalty


# Export public interface
__all__ = [
    "BeamformerState",
    "EffectiveChannels",
    "effective_channels",
    "snr_pair",
    "gap_from_snr",
    "rate_from_snr",
    "secrecy_gap",
    "secrecy_rate",
    "beampattern_of",
    "transmit_beampattern",
    "beampattern_mse",
    "al_value",
]
