import numpy as np
import pytest

from src.mathematics.scenario import SystemConfig, config_from_mapping, desired_from_config, generate_channels


SMALL_SCENARIO = {
    "n_tx": "6",
    "n_rf": "3",
    "n_streams": "2",
    "n_irs": "8",
    "n_bob": "2",
    "n_eve": "2",
    "angle_grid_deg": "-90:90:2",
    "hyper__max_inner_iters": "40",
    "hyper__max_outer_iters": "30",
}


@pytest.fixture
def small_cfg() -> SystemConfig:
    return config_from_mapping(SMALL_SCENARIO)


@pytest.fixture
def small_channels(small_cfg):
    return generate_channels(small_cfg, 7)


@pytest.fixture
def small_desired(small_cfg):
    return desired_from_config(small_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
