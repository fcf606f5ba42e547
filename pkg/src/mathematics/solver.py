"""
PDD/BSUM solver for secure hybrid beamforming in IRS-assisted ISAC.

The inner BSUM loop cycles through the blocks δ → F → W → Q → φ, each replaced
by its closed-form surrogate minimizer, until the relative change of the
augmented Lagrangian drops below ε. The outer PDD loop then either takes a
dual step on Ψ or shrinks the penalty ρ, depending on the equality residual
‖Q − FW‖_∞. An optional exterior penalty wrapper escalates the radar weight.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .metrics import (
    BeamformerState,
    al_value,
    beampattern_mse,
    beampattern_of,
    secrecy_gap,
    secrecy_rate,
    snr_pair,
)
from .numerics import ContractViolation, NumericalFailure, assert_finite, hermitian_eig, phase
from .scenario import (
    CHANNEL_LINKS,
    ChannelSet,
    DesiredBeampattern,
    SystemConfig,
    ToleranceSchedule,
    steering_matrix,
)
from .surrogates import (
    RadarGeometry,
    analog_target,
    build_f_update_terms,
    build_phi_quadratic,
    build_q_surrogate,
    phi_linear_target,
    radar_geometry,
    unit_modulus_linear_min,
)

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
REGULARIZATION = 1e-10
MAX_BRACKET_DOUBLINGS = 60
TIGHTEN_FACTOR = 0.9
DESCENT_TOLERANCE = 1e-8
BLOCK_ORDER: Tuple[str, ...] = ("delta", "analog", "digital", "q", "phi")


class PenaltyMode(str, Enum):
    """How the radar-similarity penalty is weighted."""
    FIXED_WEIGHT = "fixed_weight"
    ESCALATING = "escalating"


@dataclass(frozen=True)
class SolverMode:
    """Structural switches derived from an architecture variant."""
    fixed_analog: bool = False  # F pinned to a full-rank unit-modulus matrix
    use_irs: bool = True
    update_delta: bool = True
    update_phi: bool = True
    subconnected: bool = False
    penalty_mode: PenaltyMode = PenaltyMode.FIXED_WEIGHT
    descent_tolerance: float = DESCENT_TOLERANCE

    @property
    def active_blocks(self) -> Tuple[str, ...]:
        skipped = set()
        if not self.update_delta:
            skipped.add("delta")
        if self.fixed_analog:
            skipped.add("analog")
        if not (self.update_phi and self.use_irs):
            skipped.add("phi")
        return tuple(b for b in BLOCK_ORDER if b not in skipped)


@dataclass
class InnerRecord:
    outer_idx: int
    inner_idx: int
    al_value: float
    block_values: Dict[str, float]
    violation: float
    rho: float
    kappa: float
    penalty_round: int = 0


@dataclass
class OuterRecord:
    outer_idx: int
    violation: float
    rho: float
    kappa: float
    eps: float
    dual_updated: bool
    inner_iters: int
    penalty_round: int = 0


@dataclass
class PenaltyRecord:
    round_idx: int
    radar_penalty: float
    multiplier: float


@dataclass
class SolverTrace:
    """Loop bookkeeping of one solve; owned by that solve."""
    inner: List[InnerRecord] = field(default_factory=list)
    outer: List[OuterRecord] = field(default_factory=list)
    penalty: List[PenaltyRecord] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    descent_violations: int = 0

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)

    def check_descent(self, block: str, previous: float, current: float, tolerance: float) -> None:
        """Count a block update that raised the AL beyond the slack."""
        if current > previous + tolerance * max(1.0, abs(previous)):
            self.descent_violations += 1
            logger.warning(f"AL increased after {block} update: {previous:.12e} -> {current:.12e}")

    def rows(self) -> List[Dict[str, Any]]:
        """One row per inner iteration with the outer decision that followed it."""
        dual_by_outer = {rec.outer_idx: rec.dual_updated for rec in self.outer}
        return [
            {
                "outer_idx": rec.outer_idx,
                "inner_idx": rec.inner_idx,
                "al_value": rec.al_value,
                "violation": rec.violation,
                "rho": rec.rho,
                "kappa": rec.kappa,
                "dual_updated": int(dual_by_outer.get(rec.outer_idx, False)),
            }
            for rec in self.inner
        ]


@dataclass
class SolveReport:
    """Final iterate, trace and summary metrics of a solve."""
    state: BeamformerState
    trace: SolverTrace
    metrics: Dict[str, Any]
    converged: bool
    penalty_target_reached: Optional[bool] = None


@dataclass(frozen=True)
class _Problem:
    ch: ChannelSet
    desired: DesiredBeampattern
    cfg: SystemConfig
    mode: SolverMode
    geometry: RadarGeometry
    radar_multiplier: float = 1.0

    def al(self, state: BeamformerState) -> float:
        return al_value(
            state, self.ch, self.desired, self.cfg,
            radar_multiplier=self.radar_multiplier,
            steering=self.geometry.steering,
        )


def _problem(ch, desired, cfg, mode=None, geometry=None, radar_multiplier=1.0) -> _Problem:
    mode = mode or SolverMode()
    if mode.subconnected and cfg.n_tx % cfg.n_rf != 0:
        raise ContractViolation(f"Sub-connected mapping needs n_tx ({cfg.n_tx}) divisible by n_rf ({cfg.n_rf})")
    if geometry is None:
        geometry = radar_geometry(desired, cfg.n_tx)
    return _Problem(ch=ch, desired=desired, cfg=cfg, mode=mode, geometry=geometry, radar_multiplier=radar_multiplier)


# ---------------------------------------------------------------------------
# Block updates
# ---------------------------------------------------------------------------

def update_delta(
    q: np.ndarray,
    desired: DesiredBeampattern,
    angle_grid: Optional[np.ndarray] = None,
    steering: Optional[np.ndarray] = None,
) -> float:
    """
    Least-squares radar scaling δ = Σ_k P_d(θ_k)P_b(θ_k) / Σ_k P_d(θ_k)².

    Args:
        q: Beamformer matrix whose pattern is matched
        desired: Desired beampattern
        angle_grid: Angle grid, defaults to the one carried by desired
        steering: Precomputed steering matrix

    Returns:
        Optimal δ (nonnegative)

    Raises:
        ZeroDivisionError: If the desired pattern is identically zero
    """
    energy = desired.energy
    if energy == 0.0:
        raise ZeroDivisionError("Desired beampattern is identically zero")
    if steering is None:
        grid = desired.angles if angle_grid is None else angle_grid
        steering = steering_matrix(grid, q.shape[0])
    pattern = beampattern_of(q, steering)
    return float(np.dot(desired.values, pattern) / energy)


def project_subconnected(f: np.ndarray, n_rf: int) -> np.ndarray:
    """
    Zero every entry outside the block-diagonal sub-connected pattern.

    RF chain j drives antennas j·N_t/N_RF .. (j+1)·N_t/N_RF − 1.

    Args:
        f: Analog precoder (N_t × N_RF)
        n_rf: RF chain count

    Returns:
        Masked copy of f
    """
    n_tx = f.shape[0]
    if f.shape[1] != n_rf:
        raise ContractViolation(f"F has {f.shape[1]} columns, expected {n_rf}")
    if n_tx % n_rf != 0:
        raise ContractViolation(f"n_tx ({n_tx}) is not divisible by n_rf ({n_rf})")
    group = n_tx // n_rf
    mask = np.repeat(np.eye(n_rf, dtype=bool), group, axis=0)
    return np.where(mask, f, 0.0)


def update_analog(
    f_anchor: np.ndarray,
    w: np.ndarray,
    q: np.ndarray,
    psi: np.ndarray,
    rho: float,
    subconnected: bool = False,
) -> np.ndarray:
    """
    MM step on the analog precoder.

    Majorizes Tr(FGFᴴ) with λ_max(G)‖F‖² (constant on the unit-modulus set) and
    aligns F with F_k(λ_max(G)I − G) + (Q + ρΨ)Wᴴ.

    Args:
        f_anchor: Current analog precoder F_k
        w: Digital precoder
        q: Auxiliary precoder
        psi: Dual variable
        rho: Penalty parameter
        subconnected: Keep only the block-diagonal entries

    Returns:
        Updated unit-modulus F
    """
    terms = build_f_update_terms(w, q, psi, rho)
    f = unit_modulus_linear_min(analog_target(f_anchor, terms))
    if subconnected:
        f = project_subconnected(f, f.shape[1])
    return f


def update_digital(
    f: np.ndarray,
    q: np.ndarray,
    psi: np.ndarray,
    rho: float,
    trace: Optional[SolverTrace] = None,
) -> np.ndarray:
    """
    Exact minimizer W = (FᴴF)⁻¹Fᴴ(ρΨ + Q).

    A Gram matrix with condition number above 1e12 is regularized by
    1e-10·Tr(FᴴF)/N_RF on the diagonal and a warning is recorded.
    """
    gram = f.conj().T @ f
    rhs = f.conj().T @ (rho * psi + q)
    condition = np.linalg.cond(gram)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        shift = REGULARIZATION * np.real(np.trace(gram)) / gram.shape[0]
        gram = gram + shift * np.eye(gram.shape[0])
        message = f"Regularized digital update, cond(FᴴF) = {condition:.3e}"
        if trace is not None:
            trace.warn(message)
        else:
            logger.warning(message)
    return scipy.linalg.solve(gram, rhs, assume_a="her")


@dataclass(frozen=True)
class QSolution:
    q: np.ndarray
    alpha: float
    power: float


def solve_q_subproblem(
    z1: np.ndarray,
    z3: np.ndarray,
    fw: np.ndarray,
    psi: np.ndarray,
    rho: float,
    p_max: float,
) -> QSolution:
    """
    Minimize Tr(QᴴZ₁Q) + Re Tr(Z₃ᴴQ) + Re Tr(Ψᴴ(Q − FW)) + (1/2ρ)‖Q − FW‖² s.t. ‖Q‖² ≤ P_max.

    With 2ρZ₁ = UΠUᴴ and R = FW − ρZ₃ − ρΨ the minimizer is
    Q(α) = U(Π + (1 + 2ρα)I)⁻¹UᴴR, whose power Σ_n Δ_nn/(π_n + 2ρα + 1)² is
    strictly decreasing in α. The multiplier α is zero when the budget is
    slack and otherwise found by root bracketing.

    Raises:
        NumericalFailure: If the power equation cannot be bracketed
    """
    decomposition = hermitian_eig(2.0 * rho * z1)
    pi = np.maximum(decomposition.eigenvalues, 0.0)
    u = decomposition.eigenvectors
    rotated = u.conj().T @ (fw - rho * z3 - rho * psi)
    delta_nn = np.sum(np.abs(rotated) ** 2, axis=1)

    def power(alpha: float) -> float:
        return float(np.sum(delta_nn / (pi + 1.0 + 2.0 * rho * alpha) ** 2))

    alpha = 0.0
    if power(0.0) > p_max:
        high = 1.0
        for _ in range(MAX_BRACKET_DOUBLINGS):
            if power(high) <= p_max:
                break
            high *= 2.0
        else:
            raise NumericalFailure(f"Power equation not bracketed below α = {high:.3e}")
        alpha = scipy.optimize.brentq(lambda a: power(a) - p_max, 0.0, high, xtol=1e-15, rtol=1e-14)

    q = u @ (rotated / (pi + 1.0 + 2.0 * rho * alpha)[:, None])
    q_power = float(np.linalg.norm(q) ** 2)
    if q_power > p_max:
        q = q * np.sqrt(p_max / q_power)
        q_power = p_max
    return QSolution(q=assert_finite(q, "Q"), alpha=float(alpha), power=q_power)


def update_q(
    state: BeamformerState,
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    radar_multiplier: float = 1.0,
    geometry: Optional[RadarGeometry] = None,
) -> np.ndarray:
    """Auxiliary-precoder update through the convex Q surrogate."""
    qs = build_q_surrogate(state, ch, desired, cfg, radar_multiplier=radar_multiplier, geometry=geometry)
    return solve_q_subproblem(qs.z1, qs.z3, state.fw, state.psi_dual, state.rho, cfg.p_max).q


def update_phi(state: BeamformerState, ch: ChannelSet) -> np.ndarray:
    """IRS phase update φ = exp(j·arg t) for the current Q."""
    pq = build_phi_quadratic(ch, state.q_aux)
    return unit_modulus_linear_min(phi_linear_target(pq, state.phi))


def fixed_analog_matrix(n_tx: int) -> np.ndarray:
    """Unit-modulus DFT matrix, full rank with FᴴF = N_t·I."""
    idx = np.arange(n_tx)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n_tx)


def init_state(
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    seed: int,
    mode: Optional[SolverMode] = None,
) -> BeamformerState:
    """
    Deterministic feasible starting point.

    F has random phases (or the fixed DFT matrix), φ = 1, W is the
    least-squares fit of FW to a random Q₀ with ‖Q₀‖² = P_max, Q = FW,
    Ψ = 0, ρ = ρ₀ and δ matches the initial pattern.

    Args:
        ch: Channel matrices
        desired: Desired beampattern
        cfg: Scenario configuration
        seed: Non-negative integer seed
        mode: Structural switches

    Returns:
        BeamformerState
    """
    mode = mode or SolverMode()
    # Child stream after the channel links, so the start point never reuses channel draws.
    stream = np.random.SeedSequence(seed).spawn(len(CHANNEL_LINKS) + 1)[-1]
    rng = np.random.default_rng(stream)
    # Q₀ precedes the analog phases in the stream; it is the same for every analog layout.
    shape = (cfg.n_tx, cfg.n_streams)
    q0 = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    q0 *= np.sqrt(cfg.p_max) / np.linalg.norm(q0)

    if mode.fixed_analog:
        if cfg.n_rf != cfg.n_tx:
            raise ContractViolation("A fixed analog precoder needs n_rf == n_tx")
        f = fixed_analog_matrix(cfg.n_tx)
    else:
        f = phase(np.exp(2j * np.pi * rng.random((cfg.n_tx, cfg.n_rf))))
        if mode.subconnected:
            f = project_subconnected(f, cfg.n_rf)

    w = scipy.linalg.lstsq(f, q0)[0]
    q = f @ w
    q_power = np.linalg.norm(q) ** 2
    if q_power > cfg.p_max:
        scale = np.sqrt(cfg.p_max / q_power)
        w = w * scale
        q = f @ w

    return BeamformerState(
        delta=update_delta(q, desired),
        f_analog=f,
        w_digital=w,
        q_aux=q,
        phi=np.ones(cfg.n_irs, dtype=complex),
        psi_dual=np.zeros(shape, dtype=complex),
        rho=cfg.hyper.rho0,
    )


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------

def _apply_block(block: str, state: BeamformerState, problem: _Problem, trace: SolverTrace) -> BeamformerState:
    if block == "delta":
        return state.evolve(delta=update_delta(state.q_aux, problem.desired, steering=problem.geometry.steering))
    if block == "analog":
        f = update_analog(
            state.f_analog, state.w_digital, state.q_aux, state.psi_dual, state.rho,
            subconnected=problem.mode.subconnected,
        )
        return state.evolve(f_analog=f)
    if block == "digital":
        w = update_digital(state.f_analog, state.q_aux, state.psi_dual, state.rho, trace=trace)
        return state.evolve(w_digital=w)
    if block == "q":
        q = update_q(
            state, problem.ch, problem.desired, problem.cfg,
            radar_multiplier=problem.radar_multiplier, geometry=problem.geometry,
        )
        return state.evolve(q_aux=q)
    if block == "phi":
        return state.evolve(phi=update_phi(state, problem.ch))
    raise ValueError(f"Unknown block: {block}")


def _inner_loop(
    state: BeamformerState,
    problem: _Problem,
    eps: float,
    trace: SolverTrace,
    outer_idx: int,
    kappa: float,
    penalty_round: int = 0,
) -> Tuple[BeamformerState, int]:
    hyper = problem.cfg.hyper
    tolerance = problem.mode.descent_tolerance
    previous = problem.al(state)
    iterations = 0

    for inner_idx in range(hyper.max_inner_iters):
        iterations = inner_idx + 1
        block_values: Dict[str, float] = {}
        current = previous
        for block in problem.mode.active_blocks:
            state = _apply_block(block, state, problem, trace)
            value = problem.al(state)
            trace.check_descent(block, current, value, tolerance)
            block_values[block] = value
            current = value

        trace.inner.append(InnerRecord(
            outer_idx=outer_idx,
            inner_idx=inner_idx,
            al_value=current,
            block_values=block_values,
            violation=state.violation,
            rho=state.rho,
            kappa=kappa,
            penalty_round=penalty_round,
        ))

        change = abs(previous - current) / max(abs(previous), np.finfo(float).tiny)
        previous = current
        if change <= eps:
            break

    return state, iterations


def bsum_inner(
    state: BeamformerState,
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    mode: Optional[SolverMode] = None,
    eps: Optional[float] = None,
    trace: Optional[SolverTrace] = None,
    radar_multiplier: float = 1.0,
) -> Tuple[BeamformerState, SolverTrace]:
    """
    Cyclic block updates until the relative AL change is at most ε.

    Args:
        state: Starting iterate
        ch: Channel matrices
        desired: Desired beampattern
        cfg: Scenario configuration
        mode: Structural switches
        eps: Relative tolerance, defaults to cfg.hyper.eps_inner
        trace: Trace to append to
        radar_multiplier: Radar weight multiplier ω

    Returns:
        (final state, trace)
    """
    problem = _problem(ch, desired, cfg, mode, radar_multiplier=radar_multiplier)
    trace = trace if trace is not None else SolverTrace()
    eps = cfg.hyper.eps_inner if eps is None else eps
    outer_idx = len(trace.outer)
    state, _ = _inner_loop(state, problem, eps, trace, outer_idx, cfg.hyper.kappa0)
    return state, trace


def _pdd(
    state: BeamformerState,
    problem: _Problem,
    trace: SolverTrace,
    penalty_round: int = 0,
) -> Tuple[BeamformerState, bool, int, int]:
    hyper = problem.cfg.hyper
    kappa = hyper.kappa0
    eps = hyper.eps_inner
    best_state, best_violation = state, np.inf
    converged = False
    inner_total = 0
    outer_count = 0

    for _ in range(hyper.max_outer_iters):
        outer_idx = len(trace.outer)
        state, inner_iters = _inner_loop(state, problem, eps, trace, outer_idx, kappa, penalty_round)
        inner_total += inner_iters
        outer_count += 1

        residual = state.q_aux - state.fw
        error = float(np.max(np.abs(residual)))
        dual_updated = error <= kappa
        if dual_updated:
            state = state.evolve(psi_dual=state.psi_dual + residual / state.rho)
        else:
            state = state.evolve(rho=hyper.c_shrink * state.rho)

        trace.outer.append(OuterRecord(
            outer_idx=outer_idx,
            violation=error,
            rho=state.rho,
            kappa=kappa,
            eps=eps,
            dual_updated=dual_updated,
            inner_iters=inner_iters,
            penalty_round=penalty_round,
        ))
        logger.debug(
            f"PDD outer {outer_idx}: violation={error:.3e}, rho={state.rho:.3e}, "
            f"kappa={kappa:.3e}, dual_updated={dual_updated}, inner={inner_iters}"
        )

        if error < best_violation:
            best_state, best_violation = state, error

        kappa = max(TIGHTEN_FACTOR * error, hyper.eps_stop)
        if hyper.tolerance_schedule == ToleranceSchedule.GEOMETRIC:
            eps = max(TIGHTEN_FACTOR * eps, hyper.eps_stop)
        else:
            eps = max(TIGHTEN_FACTOR * error, hyper.eps_stop)

        if error <= hyper.eps_stop:
            converged = True
            break

    if not converged:
        trace.warn(
            f"PDD did not converge in {hyper.max_outer_iters} outer iterations; "
            f"returning best state with violation {best_violation:.3e}"
        )
        state = best_state
    return state, converged, inner_total, outer_count


def _report(
    state: BeamformerState,
    problem: _Problem,
    trace: SolverTrace,
    converged: bool,
    inner_total: int,
    outer_total: int,
    penalty_rounds: int,
    started: float,
    penalty_target_reached: Optional[bool] = None,
) -> SolveReport:
    snr_b, snr_e = snr_pair(problem.ch, state)
    mse = beampattern_mse(state.delta, state.fw, problem.desired, problem.geometry.steering)
    per_outer = inner_total / max(outer_total, 1)
    metrics = {
        "secrecy_gap": secrecy_gap(problem.ch, state),
        "secrecy_rate": secrecy_rate(problem.ch, state),
        "snr_b": snr_b,
        "snr_e": snr_e,
        "beampattern_mse": mse,
        "delta": state.delta,
        "final_violation": state.violation,
        "iterations_inner_total": inner_total,
        "iterations_outer": outer_total,
        "penalty_rounds": penalty_rounds,
        "descent_violations": trace.descent_violations,
        "complexity": complexity_estimate(problem.cfg, per_outer, outer_total)["total"],
        "wall_time": time.perf_counter() - started,
    }
    return SolveReport(
        state=state,
        trace=trace,
        metrics=metrics,
        converged=converged,
        penalty_target_reached=penalty_target_reached,
    )


def pdd_outer(
    state: BeamformerState,
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    mode: Optional[SolverMode] = None,
    trace: Optional[SolverTrace] = None,
    radar_multiplier: float = 1.0,
) -> SolveReport:
    """
    Penalty dual decomposition around the BSUM inner loop.

    After each inner solve the residual error = ‖Q − FW‖_∞ decides between the
    dual step Ψ ← Ψ + (Q − FW)/ρ (error ≤ κ) and the penalty shrink ρ ← c·ρ.
    κ then becomes 0.9·error. The inner tolerance ε shrinks by 0.9 per round
    (or tracks 0.9·error under the violation schedule), floored at eps_stop.

    Args:
        state: Starting iterate
        ch: Channel matrices
        desired: Desired beampattern
        cfg: Scenario configuration
        mode: Structural switches
        trace: Trace to append to
        radar_multiplier: Radar weight multiplier ω

    Returns:
        SolveReport; on non-convergence the state with the smallest violation
    """
    started = time.perf_counter()
    problem = _problem(ch, desired, cfg, mode, radar_multiplier=radar_multiplier)
    trace = trace if trace is not None else SolverTrace()
    state, converged, inner_total, outer_count = _pdd(state, problem, trace)
    return _report(state, problem, trace, converged, inner_total, outer_count, 0, started)


def exterior_penalty(
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    mode: Optional[SolverMode] = None,
    seed: int = 0,
    state: Optional[BeamformerState] = None,
) -> SolveReport:
    """
    Full solve of the penalized secure beamforming problem.

    fixed_weight runs one PDD solve at cfg.mu. escalating repeats warm-started
    PDD solves, multiplying the radar weight by ς each round, until the radar
    penalty P_r(δ, FW) reaches penalty_target or the round cap.

    Args:
        ch: Channel matrices
        desired: Desired beampattern
        cfg: Scenario configuration
        mode: Structural switches (including the penalty mode)
        seed: Seed of the initial state
        state: Explicit starting iterate

    Returns:
        SolveReport
    """
    started = time.perf_counter()
    mode = mode or SolverMode()
    problem = _problem(ch, desired, cfg, mode)
    if state is None:
        state = init_state(ch, desired, cfg, seed, mode)
    trace = SolverTrace()
    logger.info(
        f"Solving: n_tx={cfg.n_tx}, n_rf={cfg.n_rf}, n_irs={cfg.n_irs}, mu={cfg.mu}, "
        f"mode={mode.penalty_mode.value}, seed={seed}"
    )

    if mode.penalty_mode == PenaltyMode.FIXED_WEIGHT:
        state, converged, inner_total, outer_total = _pdd(state, problem, trace)
        report = _report(state, problem, trace, converged, inner_total, outer_total, 1, started)
        logger.info(
            f"Solve finished: converged={converged}, rate={report.metrics['secrecy_rate']:.4f}, "
            f"mse={report.metrics['beampattern_mse']:.4e}"
        )
        return report

    multiplier = 1.0
    inner_total = outer_total = 0
    converged = reached = False
    rounds = 0
    for round_idx in range(cfg.hyper.max_penalty_rounds):
        rounds = round_idx + 1
        round_problem = _problem(ch, desired, cfg, mode, problem.geometry, radar_multiplier=multiplier)
        state, converged, inner, outer = _pdd(state, round_problem, trace, penalty_round=round_idx)
        inner_total += inner
        outer_total += outer

        radar_penalty = beampattern_mse(state.delta, state.fw, desired, problem.geometry.steering)
        trace.penalty.append(PenaltyRecord(round_idx=round_idx, radar_penalty=radar_penalty, multiplier=multiplier))
        logger.debug(f"Penalty round {round_idx}: P_r={radar_penalty:.4e}, multiplier={multiplier:.4f}")
        if radar_penalty <= cfg.hyper.penalty_target:
            reached = True
            break
        multiplier *= cfg.hyper.varsigma

    if not reached:
        trace.warn(
            f"Radar penalty target {cfg.hyper.penalty_target:.3e} not reached after {rounds} rounds"
        )
    report = _report(state, problem, trace, converged, inner_total, outer_total, rounds, started, reached)
    report.metrics["radar_multiplier"] = multiplier
    logger.info(
        f"Solve finished: converged={converged}, target_reached={reached}, rounds={rounds}, "
        f"rate={report.metrics['secrecy_rate']:.4f}"
    )
    return report


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def complexity_estimate(cfg: SystemConfig, inner_iters: float, outer_iters: float) -> Dict[str, float]:
    """
    Operation counts of one BSUM cycle per block and the total over a solve.

    Args:
        cfg: Scenario configuration
        inner_iters: BSUM iterations per outer iteration (T₁)
        outer_iters: PDD iterations (T₂)

    Returns:
        Mapping of block name to its order-of-magnitude count, plus 'cycle' and 'total'
    """
    n_t, n_rf, n_i, k = cfg.n_tx, cfg.n_rf, cfg.n_irs, cfg.n_angles
    blocks = {
        "delta": float(n_t ** 2 * k),
        "analog": float(n_t * n_rf ** 3),
        "digital": float(n_rf ** 3),
        "q": float(n_t ** 3),
        "phi": float(n_i ** 3),
    }
    cycle = float(n_t * (n_t * k + n_rf ** 3 + n_t ** 2) + n_rf ** 3 + n_i ** 3)
    return {**blocks, "cycle": cycle, "total": float(inner_iters * outer_iters * cycle)}


def directional_derivatives(
    state: BeamformerState,
    ch: ChannelSet,
    desired: DesiredBeampattern,
    cfg: SystemConfig,
    mode: Optional[SolverMode] = None,
    n_directions: int = 20,
    step: float = 1e-6,
    seed: int = 0,
    radar_multiplier: float = 1.0,
) -> np.ndarray:
    """
    Central-difference directional derivatives of the AL along feasible curves.

    F and φ move by entry-wise phase rotations, W and δ freely, and Q freely
    inside the power ball or along the sphere when the budget is active. Each
    curve is traversed in both directions from the state.

    Returns:
        Array of n_directions derivative estimates
    """
    problem = _problem(ch, desired, cfg, mode, radar_multiplier=radar_multiplier)
    mode = problem.mode
    rng = np.random.default_rng(seed)
    q_power = float(np.linalg.norm(state.q_aux) ** 2)
    on_sphere = q_power >= cfg.p_max * (1.0 - 1e-6)
    derivatives = np.empty(n_directions)

    def complex_normal(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    for i in range(n_directions):
        d_delta = rng.standard_normal()
        d_f = rng.standard_normal(state.f_analog.shape)
        d_w = complex_normal(state.w_digital.shape)
        d_phi = rng.standard_normal(state.phi.shape)
        d_q = complex_normal(state.q_aux.shape)
        if on_sphere:
            d_q -= np.real(np.vdot(state.q_aux, d_q)) / q_power * state.q_aux

        def moved(t: float) -> BeamformerState:
            changes: Dict[str, Any] = {"w_digital": state.w_digital + t * d_w}
            if mode.update_delta:
                changes["delta"] = state.delta + t * d_delta
            if not mode.fixed_analog:
                changes["f_analog"] = state.f_analog * np.exp(1j * t * d_f)
            if mode.update_phi and mode.use_irs:
                changes["phi"] = state.phi * np.exp(1j * t * d_phi)
            q = state.q_aux + t * d_q
            changes["q_aux"] = q * np.sqrt(cfg.p_max) / np.linalg.norm(q) if on_sphere else q
            return state.evolve(**changes)

        derivatives[i] = (problem.al(moved(step)) - problem.al(moved(-step))) / (2.0 * step)
    return derivatives


# Export public interface
__all__ = [
    "BLOCK_ORDER",
    "PenaltyMode",
    "SolverMode",
    "InnerRecord",
    "OuterRecord",
    "PenaltyRecord",
    "SolverTrace",
    "SolveReport",
    "QSolution",
    "update_delta",
    "project_subconnected",
    "update_analog",
    "update_digital",
    "solve_q_subproblem",
    "update_q",
    "update_phi",
    "fixed_analog_matrix",
    "init_state",
    "bsum_inner",
    "pdd_outer",
    "exterior_penalty",
    "complexity_estimate",
    "directional_derivatives",
]
