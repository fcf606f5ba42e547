"""
Majorization surrogates for the BSUM block updates.

Every block of the augmented Lagrangian is replaced by a tight convex upper
bound whose minimizer has a closed form:

- the quadratic upper bound xᴴSx + 2Re{xᴴ(T − S)x_k} + x_kᴴ(S − T)x_k of a
  Hermitian form xᴴTx with S = s·I, s ≥ λ_max(T);
- the unit-modulus linear minimizer exp(j·arg k);
- the matrices Z₁ and Z₃ of the auxiliary-precoder (Q) subproblem;
- the IRS quadratic in φ.

Hermitian forms act on column-stacked vectors, so vec(A)ᴴvec(X) = Tr(AX) for
Hermitian A.
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .metrics import BeamformerState, beampattern_of, effective_channels
from .numerics import (
    ContractViolation,
    DimensionError,
    hadamard,
    max_eigenvalue,
    phase,
    symmetrize,
    vec,
)
from .scenario import ChannelSet, DesiredBeampattern, SystemConfig, secrecy_weight, steering_matrix

logger = logging.getLogger(__name__)

MAJORIZER_TOLERANCE = 1e-9
# ‖QQᴴ‖_F² has curvature at most 12·‖Q‖² on the power ball.
QUARTIC_CURVATURE = 6.0


@dataclass(frozen=True)
class RadarGeometry:
    """Steering matrix and spectral constant of the radar term, fixed for a solve."""
    steering: np.ndarray  # N_t × K
    desired: np.ndarray  # K values of P_d
    gram_lambda: float  # λ_max of the K×K Gram matrix |a_kᴴ a_l|²

    @property
    def n_angles(self) -> int:
        return int(self.desired.size)


def radar_geometry(desired: DesiredBeampattern, n_tx: int) -> RadarGeometry:
    """
    Precompute the radar quantities shared by every iteration of a solve.

    λ_max(Σ_k vec(A_k)vecᴴ(A_k)) equals λ_max of the K×K Gram matrix with
    entries vecᴴ(A_k)vec(A_l) = |a_kᴴa_l|², so the N_t²×N_t² matrix is never formed.

    Args:
        desired: Desired beampattern over the angle grid
        n_tx: Transmit antenna count

    Returns:
        RadarGeometry
    """
    steering = steering_matrix(desired.angles, n_tx)
    gram = np.abs(steering.conj().T @ steering) ** 2
    return RadarGeometry(
        steering=steering,
        desired=np.asarray(desired.values, dtype=float),
        gram_lambda=max_eigenvalue(gram),
    )


@dataclass(frozen=True)
class QSurrogate:
    """
    Matrices of the convex Q subproblem  min Tr(QᴴZ₁Q) + Re Tr(Z₃ᴴQ) + AL coupling.

    z1 = μH_eᴴH_e + C₁ + γI and z3 = 2Z₂Q_k + 2C₂Q_k − 2γQ_k, where
    z2 = −μH_bᴴH_b − C₂ − B_t collects the concave quadratic pieces.
    """
    z1: np.ndarray  # N_t × N_t Hermitian PSD
    z2: np.ndarray  # N_t × N_t Hermitian
    z3: np.ndarray  # N_t × M
    c1: np.ndarray  # unvec(2C·vec(Q_kQ_kᴴ))
    c2: np.ndarray  # 2λ_max(C)·Q_kQ_kᴴ
    b_t: np.ndarray  # radar weight · Σ_k 2δP_d(θ_k)A_k
    gamma: float  # curvature of the quartic bound
    lambda_c: float  # λ_max(C)
    weight: float  # radar weight ω(1−μ)/K
    steering: np.ndarray = field(repr=False)

    def a_k(self) -> List[np.ndarray]:
        """Outer products A_k = a(θ_k)aᴴ(θ_k), each N_t×N_t."""
        return [np.outer(a, a.conj()) for a in self.steering.T]

    def c_big(self) -> np.ndarray:
        """C = weight · Σ_k vec(A_k)vecᴴ(A_k), an N_t²×N_t² PSD matrix."""
        stacked = np.column_stack([vec(a) for a in self.a_k()])
        return self.weight * (stacked @ stacked.conj().T)


class PhiQuadratic(NamedTuple):
    """
    Terms of ‖H_e(Φ)Q‖² − ‖H_b(Φ)Q‖² as a quadratic in φ.

    ‖H_e(Φ)Q‖² = φᴴ(B ⊙ Eᵀ)φ + 2Re{φᴴj*} + ‖H_aeQ‖², and likewise for Bob with M and o.
    """
    b_mat: np.ndarray  # H_ieᴴH_ie
    e_mat: np.ndarray  # H_ai Q Qᴴ H_aiᴴ
    j_vec: np.ndarray  # diag(H_ai Q Qᴴ H_aeᴴ H_ie)
    m_mat: np.ndarray  # H_ibᴴH_ib
    o_vec: np.ndarray  # diag(H_ai Q Qᴴ H_abᴴ H_ib)
    p_mat: np.ndarray  # B − M

    @property
    def p_hadamard(self) -> np.ndarray:
        """Hessian of the φ quadratic, (B − M) ⊙ Eᵀ."""
        return hadamard(self.p_mat, self.e_mat.T)


class FUpdateTerms(NamedTuple):
    """Quantities of the analog-precoder majorizer."""
    g: np.ndarray  # WWᴴ
    d: np.ndarray  # W(Q + ρΨ)ᴴ
    lambda_max_g: float


def quadratic_majorizer_value(t: np.ndarray, s_max: float, x: np.ndarray, x_anchor: np.ndarray) -> float:
    """
    Upper bound of xᴴTx that touches at x_anchor.

    Args:
        t: Hermitian matrix T
        s_max: Scalar s with s ≥ λ_max(T)
        x: Evaluation point
        x_anchor: Expansion point x_k

    Returns:
        s‖x‖² + 2Re{xᴴ(T − sI)x_k} + x_kᴴ(sI − T)x_k
    """
    t = symmetrize(t)
    top = max_eigenvalue(t)
    if s_max < top - MAJORIZER_TOLERANCE * max(1.0, abs(top)):
        raise ContractViolation(f"s_max = {s_max:.6g} is below λ_max(T) = {top:.6g}")

    x = np.asarray(x, dtype=complex)
    x_anchor = np.asarray(x_anchor, dtype=complex)
    t_anchor = t @ x_anchor
    shifted = t_anchor - s_max * x_anchor
    value = (
        s_max * np.vdot(x, x)
        + 2.0 * np.vdot(x, shifted).real
        + (s_max * np.vdot(x_anchor, x_anchor) - np.vdot(x_anchor, t_anchor))
    )
    return float(np.real(value))


def unit_modulus_linear_min(k: np.ndarray) -> np.ndarray:
    """
    Minimizer of −2Re{fᴴk} over unit-modulus f.

    Args:
        k: Alignment target

    Returns:
        exp(j·arg k) with zero entries mapped to phase 0
    """
    return phase(k)


def build_f_update_terms(w: np.ndarray, q: np.ndarray, psi: np.ndarray, rho: float) -> FUpdateTerms:
    """
    Assemble G = WWᴴ, D = W(Q + ρΨ)ᴴ and λ_max(G).

    Args:
        w: Digital precoder (N_RF × M)
        q: Auxiliary precoder (N_t × M)
        psi: Dual variable (N_t × M)
        rho: Penalty parameter

    Returns:
        FUpdateTerms
    """
    if rho <= 0:
        raise ContractViolation(f"rho must be positive, got {rho}")
    if q.shape != psi.shape or w.shape[1] != q.shape[1]:
        raise DimensionError(f"Incompatible shapes W {w.shape}, Q {q.shape}, Ψ {psi.shape}")

    g = w @ w.conj().T
    d = w @ (q + rho * psi).conj().T
    return FUpdateTerms(g=g, d=d, lambda_max_g=max_eigenvalue(g))


def analog_target(f_anchor: np.ndarray, terms: FUpdateTerms) -> np.ndarray:
    """
    Alignment target of the analog update, F_k(λ_max(G)I − G) + Dᴴ.

    Row i is the conjugate of (λ_max(G)I − G)f_iᴴ + d_i.
    """
    n_rf = terms.g.shape[0]
    return f_anchor @ (terms.lambda_max_g * np.eye(n_rf) - terms.g) + terms.d.conj().T


def f_surrogate_value(
    terms: FUpdateTerms,
    f: np.ndarray,
    f_anchor: np.ndarray,
    q: np.ndarray,
    psi: np.ndarray,
    rho: float,
) -> float:
    """
    Majorizer of (1/2ρ)‖FW − (Q + ρΨ)‖² touching at f_anchor.

    Equal to the exact value at F = f_anchor.
    """
    lam = terms.lambda_max_g
    target = q + rho * psi
    bound = (
        lam * np.vdot(f, f).real
        + 2.0 * np.vdot(f, f_anchor @ (terms.g - lam * np.eye(terms.g.shape[0]))).real
        + (lam * np.vdot(f_anchor, f_anchor) - np.trace(f_anchor @ terms.g @ f_anchor.conj().T)).real
    )
    cross = 2.0 * np.vdot(f, terms.d.conj().T).real
    return float((bound - cross + np.linalg.norm(target) ** 2) / (2.0 * rho))


def radar_weight(cfg: SystemConfig, n_angles: int, radar_multiplier: float = 1.0) -> float:
    """Per-angle weight ω(1−μ)/K of the squared beampattern error."""
    return radar_multiplier * (1.0 - cfg.mu) / n_angles


def build_q_surrogate(
    state: BeamformerState,
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    radar_multiplier: float = 1.0,
    geometry: Optional[RadarGeometry] = None,
) -> QSurrogate:
    """
    Convex majorizer of the AL in Q, anchored at state.q_aux.

    The quartic radar term Σ_k p_k(Q)² = vec(QQᴴ)ᴴC vec(QQᴴ) is bounded with
    S = λ_max(C)·I, which leaves λ_max(C)‖QQᴴ‖_F². That remainder is bounded by
    its tangent at Q_k plus γ‖Q − Q_k‖², γ = 6λ_max(C)P_max, valid on the power ball.
    The remaining concave pieces are linearized at Q_k.

    Args:
        state: Current iterate (anchor Q_k = state.q_aux, current δ and φ)
        ch: Channel matrices
        desired: Desired beampattern
        cfg: Scenario configuration
        radar_multiplier: Radar weight multiplier ω of the escalating penalty
        geometry: Precomputed radar geometry

    Returns:
        QSurrogate
    """
    q_k = state.q_aux
    n_tx = q_k.shape[0]
    if q_k.shape != (cfg.n_tx, cfg.n_streams):
        raise DimensionError(f"Q has shape {q_k.shape}, expected {(cfg.n_tx, cfg.n_streams)}")
    if geometry is None:
        geometry = radar_geometry(desired, n_tx)

    eff = effective_channels(ch, state.phi)
    h_e, h_b = eff.h_eve_eff, eff.h_bob_eff
    eye = np.eye(n_tx)

    weight = radar_weight(cfg, geometry.n_angles, radar_multiplier)
    lambda_c = weight * geometry.gram_lambda
    a = geometry.steering
    p_anchor = beampattern_of(q_k, a)

    c1 = 2.0 * weight * (a * p_anchor) @ a.conj().T
    c2 = 2.0 * lambda_c * (q_k @ q_k.conj().T)
    b_t = 2.0 * weight * state.delta * (a * geometry.desired) @ a.conj().T
    gamma = QUARTIC_CURVATURE * lambda_c * cfg.p_max

    comm = secrecy_weight(cfg)
    z1 = comm * (h_e.conj().T @ h_e) + c1 + gamma * eye
    z2 = -comm * (h_b.conj().T @ h_b) - c2 - b_t
    z3 = 2.0 * (z2 @ q_k) + 2.0 * (c2 @ q_k) - 2.0 * gamma * q_k

    return QSurrogate(
        z1=0.5 * (z1 + z1.conj().T),
        z2=0.5 * (z2 + z2.conj().T),
        z3=z3,
        c1=c1,
        c2=c2,
        b_t=b_t,
        gamma=gamma,
        lambda_c=lambda_c,
        weight=weight,
        steering=a,
    )


def q_surrogate_value(qs: QSurrogate, q: np.ndarray, state: BeamformerState) -> float:
    """
    Surrogate of the AL in Q, up to an additive constant.

    Tr(QᴴZ₁Q) + Re Tr(Z₃ᴴQ) + Re Tr(Ψᴴ(Q − FW)) + (1/2ρ)‖Q − FW‖²
    """
    residual = q - state.fw
    return float(
        np.real(np.trace(q.conj().T @ qs.z1 @ q))
        + np.vdot(qs.z3, q).real
        + np.vdot(state.psi_dual, residual).real
        + np.linalg.norm(residual) ** 2 / (2.0 * state.rho)
    )


def build_phi_quadratic(ch: ChannelSet, q: np.ndarray) -> PhiQuadratic:
    """
    Express the secrecy term as a quadratic form in the IRS phases.

    Args:
        ch: Channel matrices
        q: Precoder entering the secrecy term (N_t × M)

    Returns:
        PhiQuadratic
    """
    if ch.h_ai.shape[1] != q.shape[0]:
        raise DimensionError(f"H_ai has {ch.h_ai.shape[1]} columns, Q has {q.shape[0]} rows")

    reflected = ch.h_ai @ q  # N_i × M
    eve_cross = ch.h_ie.conj().T @ (ch.h_ae @ q)
    bob_cross = ch.h_ib.conj().T @ (ch.h_ab @ q)

    b_mat = ch.h_ie.conj().T @ ch.h_ie
    m_mat = ch.h_ib.conj().T @ ch.h_ib
    return PhiQuadratic(
        b_mat=b_mat,
        e_mat=reflected @ reflected.conj().T,
        # diag(X Yᴴ) without forming the N_i×N_i product
        j_vec=np.sum(reflected * eve_cross.conj(), axis=1),
        m_mat=m_mat,
        o_vec=np.sum(reflected * bob_cross.conj(), axis=1),
        p_mat=b_mat - m_mat,
    )


def phi_quadratic_value(pq: PhiQuadratic, phi: np.ndarray) -> float:
    """φᴴ((B − M) ⊙ Eᵀ)φ + 2Re{φᴴ(j* − o*)}, the φ-dependent part of ‖H_eQ‖² − ‖H_bQ‖²."""
    quad = np.vdot(phi, pq.p_hadamard @ phi).real
    linear = 2.0 * np.vdot(phi, (pq.j_vec - pq.o_vec).conj()).real
    return float(quad + linear)


def phi_linear_target(pq: PhiQuadratic, phi_anchor: np.ndarray) -> np.ndarray:
    """
    Alignment target t = (λ_max(P)I − P)φ_k + (o* − j*) with P = (B − M) ⊙ Eᵀ.

    Args:
        pq: IRS quadratic
        phi_anchor: Current IRS phases

    Returns:
        Vector t; the φ update is exp(j·arg t)
    """
    p_h = symmetrize(pq.p_hadamard)
    lam = max_eigenvalue(p_h)
    return lam * phi_anchor - p_h @ phi_anchor + (pq.o_vec - pq.j_vec).conj()


# Export public interface
__all__ = [
    "RadarGeometry",
    "radar_geometry",
    "QSurrogate",
    "PhiQuadratic",
    "FUpdateTerms",
    "quadratic_majorizer_value",
    "unit_modulus_linear_min",
    "build_f_update_terms",
    "analog_target",
    "f_surrogate_value",
    "radar_weight",
    "build_q_surrogate",
    "q_surrogate_value",
    "build_phi_quadratic",
    "phi_quadratic_value",
    "phi_linear_target",
]
