import numpy as np
import pytest
from pydantic import ValidationError

from src.mathematics.scenario import (
    SystemConfig,
    apply_overrides,
    config_from_mapping,
    desired_beampattern,
    desired_from_config,
    generate_channels,
    load_config,
    link_gain,
    pathloss,
    reference_snr,
    secrecy_weight,
    steering_matrix,
    steering_vector,
)


def test_default_config():
    cfg = SystemConfig()
    assert cfg.n_tx == 10
    assert cfg.n_angles == 181
    assert cfg.angles()[0] == pytest.approx(-np.pi / 2)
    assert cfg.angles()[-1] == pytest.approx(np.pi / 2)
    assert cfg.hyper.rho0 == 0.1
    assert cfg.hyper.c_shrink == 0.7
    assert cfg.hyper.tolerance_schedule == "geometric"
    assert cfg.noise_power_db == -100.0
    assert (cfg.pathloss_exponent, cfg.irs_pathloss_exponent) == (3.5, 2.0)
    assert cfg.secrecy_scaling == "reference_snr"


def test_dimension_validation():
    with pytest.raises(ValidationError):
        SystemConfig(n_tx=4, n_rf=6)
    with pytest.raises(ValidationError):
        SystemConfig(n_rf=2, n_streams=3)
    with pytest.raises(ValidationError):
        SystemConfig(mu=1.5)


def test_hyper_validation():
    with pytest.raises(ValidationError):
        config_from_mapping({"hyper__varsigma": "1.0"})
    with pytest.raises(ValidationError):
        config_from_mapping({"hyper__c_shrink": "1.0"})


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError):
        config_from_mapping({"n_antennas": "4"})
    with pytest.raises(ValidationError):
        config_from_mapping({"distances__xy": "4"})


def test_config_from_mapping_keys():
    cfg = config_from_mapping({
        "n_tx": "8",
        "distances__ab": "50",
        "hyper__rho0": "0.2",
        "target_centers_deg": "-30,30",
        "target_width_deg": "10",
        "angle_grid_deg": "-90:90:2",
        "p_max_db": "3",
    })
    assert cfg.n_tx == 8
    assert cfg.distances.ab == 50.0
    assert cfg.distances.ai == 30.0
    assert cfg.hyper.rho0 == 0.2
    assert np.allclose(cfg.target_centers, np.deg2rad([-30.0, 30.0]))
    assert cfg.target_width == pytest.approx(np.deg2rad(10.0))
    assert cfg.n_angles == 91
    assert cfg.p_max == pytest.approx(10 ** 0.3)


def test_load_config(tmp_path):
    path = tmp_path / "scenario.env"
    path.write_text("# small case\nn_tx=6\nn_rf=3\nmu=0.25\nhyper__max_outer_iters=7\n", encoding="utf-8")
    cfg = load_config(path)
    assert (cfg.n_tx, cfg.n_rf, cfg.mu) == (6, 3, 0.25)
    assert cfg.hyper.max_outer_iters == 7


def test_load_config_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.env")


def test_apply_overrides_merges_nested():
    cfg = config_from_mapping({"distances__ab": "50"})
    updated = apply_overrides(cfg, {"distances__ae": 60, "mu": 0.8})
    assert updated.distances.ab == 50.0
    assert updated.distances.ae == 60.0
    assert updated.mu == 0.8
    assert cfg.mu == 0.5


def test_with_updates_revalidates():
    cfg = SystemConfig()
    assert cfg.with_updates(n_rf=10).n_rf == 10
    with pytest.raises(ValidationError):
        cfg.with_updates(n_rf=11)


def test_pathloss():
    assert pathloss(1.0, -30.0, 3.0) == pytest.approx(1e-3)
    assert pathloss(10.0, -30.0, 3.0) == pytest.approx(1e-6)


def test_channels_are_seeded(small_cfg):
    first = generate_channels(small_cfg, 11)
    second = generate_channels(small_cfg, 11)
    other = generate_channels(small_cfg, 12)
    for name in ("h_ab", "h_ae", "h_ai", "h_ib", "h_ie"):
        assert np.array_equal(getattr(first, name), getattr(second, name))
        assert not np.array_equal(getattr(first, name), getattr(other, name))
    first.validate(small_cfg)


def test_channels_read_only(small_cfg):
    ch = generate_channels(small_cfg, 0)
    with pytest.raises(ValueError):
        ch.h_ab[0, 0] = 1.0


def test_links_use_independent_streams(small_cfg):
    ch_small = generate_channels(small_cfg, 3)
    ch_large = generate_channels(small_cfg.with_updates(n_irs=16), 3)
    assert np.array_equal(ch_small.h_ab, ch_large.h_ab)
    assert np.array_equal(ch_small.h_ae, ch_large.h_ae)


def test_channel_power_matches_pathloss():
    cfg = SystemConfig(noise_power_db=0.0, pathloss_exponent=3.0, irs_pathloss_exponent=None)
    draws = np.concatenate([generate_channels(cfg, seed).h_ab.ravel() for seed in range(250)])
    assert draws.size == 10_000
    expected = pathloss(cfg.distances.ab, cfg.pathloss_ref_db, cfg.pathloss_exponent)
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(expected, rel=0.05)


def test_channel_power_follows_link_gain():
    cfg = SystemConfig(n_irs=64)
    channels = [generate_channels(cfg, seed) for seed in range(40)]
    for link in ("ai", "ib", "ie"):
        draws = np.concatenate([getattr(ch, f"h_{link}").ravel() for ch in channels])
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(link_gain(cfg, link), rel=0.05), link


def test_link_gain_whitens_receiver_links():
    cfg = SystemConfig(noise_power_db=-90.0, pathloss_exponent=3.0, irs_pathloss_exponent=2.0)
    assert link_gain(cfg, "ab") == pytest.approx(pathloss(80.0, -30.0, 3.0) * 1e9)
    assert link_gain(cfg, "ae") == pytest.approx(pathloss(80.0, -30.0, 3.0) * 1e9)
    assert link_gain(cfg, "ai") == pytest.approx(pathloss(30.0, -30.0, 2.0))
    assert link_gain(cfg, "ib") == pytest.approx(pathloss(40.0, -30.0, 2.0) * 1e9)
    with pytest.raises(ValueError):
        link_gain(cfg, "bi")


def test_irs_exponent_falls_back_to_direct():
    cfg = SystemConfig(pathloss_exponent=3.0, irs_pathloss_exponent=None, noise_power_db=0.0)
    assert link_gain(cfg, "ai") == pytest.approx(pathloss(30.0, -30.0, 3.0))


def test_reference_snr_and_secrecy_weight():
    cfg = SystemConfig()
    direct = link_gain(cfg, "ab")
    reflected = cfg.n_irs * link_gain(cfg, "ai") * link_gain(cfg, "ib")
    assert reference_snr(cfg) == pytest.approx(cfg.p_max * cfg.n_bob * (direct + reflected))
    assert secrecy_weight(cfg) == pytest.approx(cfg.mu / reference_snr(cfg))
    assert secrecy_weight(cfg.with_updates(secrecy_scaling="none")) == cfg.mu
    assert secrecy_weight(cfg.with_updates(mu=0.0)) == 0.0


def test_without_irs_zeroes_reflected_links(small_channels):
    direct = small_channels.without_irs()
    assert np.array_equal(direct.h_ab, small_channels.h_ab)
    assert not np.any(direct.h_ai)
    assert not np.any(direct.h_ib)
    assert not np.any(direct.h_ie)


def test_steering_vector():
    assert np.array_equal(steering_vector(0.3, 1), np.ones(1))
    assert np.allclose(steering_vector(0.0, 5), np.ones(5))
    a = steering_vector(np.pi / 6, 4)
    assert np.allclose(a, np.exp(1j * np.pi * np.arange(4) * 0.5))
    assert np.allclose(np.abs(a), 1.0)


def test_steering_matrix_columns():
    angles = np.deg2rad([-40.0, 0.0, 25.0])
    a = steering_matrix(angles, 6)
    assert a.shape == (6, 3)
    for k, theta in enumerate(angles):
        assert np.allclose(a[:, k], steering_vector(theta, 6))


def test_desired_beampattern_windows():
    grid = np.deg2rad(np.arange(-90.0, 91.0, 1.0))
    desired = desired_beampattern([(np.deg2rad(-40.0), np.deg2rad(20.0))], grid)
    degrees = np.round(np.rad2deg(desired.angles)).astype(int)
    inside = set(degrees[desired.values == 1.0].tolist())
    assert inside == set(range(-50, -29))
    assert desired.energy == 21.0


def test_single_wide_target():
    cfg = config_from_mapping({"target_centers_deg": "0", "target_width_deg": "60"})
    desired = desired_from_config(cfg)
    degrees = np.round(np.rad2deg(desired.angles)).astype(int)
    assert set(degrees[desired.values == 1.0].tolist()) == set(range(-30, 31))


def test_desired_beampattern_rejects_empty():
    grid = np.deg2rad(np.arange(-90.0, 91.0, 10.0))
    with pytest.raises(ValueError):
        desired_beampattern([], grid)
    with pytest.raises(ValueError):
        desired_beampattern([(np.deg2rad(5.0), np.deg2rad(2.0))], grid)
