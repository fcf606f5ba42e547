"""Random instances shared by the solver and surrogate tests."""

import numpy as np

from src.mathematics.metrics import BeamformerState
from src.mathematics.numerics import phase
from src.mathematics.scenario import ChannelSet, SystemConfig


def complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def unit_channels(cfg: SystemConfig, rng) -> ChannelSet:
    """Unit-variance channels without path loss, so secrecy and radar terms are comparable."""
    return ChannelSet(
        h_ab=complex_normal(rng, (cfg.n_bob, cfg.n_tx)),
        h_ae=complex_normal(rng, (cfg.n_eve, cfg.n_tx)),
        h_ai=complex_normal(rng, (cfg.n_irs, cfg.n_tx)),
        h_ib=complex_normal(rng, (cfg.n_bob, cfg.n_irs)),
        h_ie=complex_normal(rng, (cfg.n_eve, cfg.n_irs)),
    )


def random_state(cfg: SystemConfig, rng, rho: float = 0.3, q_power: float = None) -> BeamformerState:
    """Feasible state with Q ≠ FW and a nonzero dual variable."""
    shape = (cfg.n_tx, cfg.n_streams)
    q = complex_normal(rng, shape)
    target = cfg.p_max * rng.uniform(0.2, 1.0) if q_power is None else q_power
    q *= np.sqrt(target) / np.linalg.norm(q)
    return BeamformerState(
        delta=float(rng.uniform(0.1, 2.0)),
        f_analog=phase(complex_normal(rng, (cfg.n_tx, cfg.n_rf))),
        w_digital=0.3 * complex_normal(rng, (cfg.n_rf, cfg.n_streams)),
        q_aux=q,
        phi=phase(complex_normal(rng, cfg.n_irs)),
        psi_dual=0.2 * complex_normal(rng, shape),
        rho=rho,
    )
