import math

import pytest
from hypothesis import given, strategies as st

from ioisac import (ActivationVector, DomainError, ParseError, ValidationError,
                    aspect_cos, default_scenario, load_scenario, pairwise_angle,
                    vote_threshold)
from ioisac.scenario import (config_from_raw, db_to_linear, dbm_to_watt,
                             linear_to_db, raw_default_config, replace,
                             watt_to_dbm)


def test_unit_conversions():
    assert db_to_linear(27.0) == pytest.approx(10 ** 2.7)
    assert dbm_to_watt(-60.0) == pytest.approx(1e-9)
    assert dbm_to_watt(-90.0) == pytest.approx(1e-12)


@given(st.floats(min_value=-120.0, max_value=60.0))
def test_dbm_round_trip(dbm):
    assert watt_to_dbm(dbm_to_watt(dbm)) == pytest.approx(dbm, rel=1e-9)


def test_default_scenario_values(cfg):
    assert cfg.n_devices == 8
    assert cfg.device_positions[2] == (10.0, 0.0)
    assert cfg.device_positions[3] == cfg.device_positions[5] == (-10.0, -5.0)
    assert cfg.server_position == (-2.5, 10.0)
    assert cfg.target_position == (5.0, 0.0)
    assert cfg.beta == pytest.approx(10 ** 2.7)
    assert cfg.noise_comm == pytest.approx(1e-9)
    assert cfg.noise_sense == pytest.approx(1e-12)
    assert cfg.p_max == pytest.approx(0.03)
    assert cfg.p_sum == pytest.approx(0.09)
    assert cfg.data_bits == pytest.approx(1.0e6)  # 0.125 MB, SI bytes
    assert cfg.p_f == cfg.p_m == 0.1
    assert cfg.lam == 3.0
    assert cfg.alpha == 0.5


def test_load_scenario_file(tmp_path):
    path = tmp_path / "scn.toml"
    path.write_text('beta_db = 27.0\np_sum_mw = 90.0\nseed = 3\n')
    cfg = load_scenario(path)
    assert cfg.beta == pytest.approx(501.187233627, rel=1e-9)
    assert cfg.p_sum == pytest.approx(0.09)
    assert cfg.seed == 3


def test_load_scenario_errors(tmp_path):
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("beta_db = [unterminated\n")
    with pytest.raises(ParseError):
        load_scenario(bad)


def test_unknown_key_rejected():
    with pytest.raises(ValidationError, match="unknown config key"):
        config_from_raw({"beta_dbx": 27.0})


def test_degradation_invariant():
    with pytest.raises(ValidationError, match="lambda"):
        config_from_raw({"lambda": 20.0, "p_f": 0.1})


def test_more_invariants(cfg):
    with pytest.raises(ValidationError, match="prior"):
        replace(cfg, prior_h0=0.6, prior_h1=0.5)
    with pytest.raises(ValidationError, match="co-located"):
        replace(cfg, device_positions=((5.0, 0.0),))
    with pytest.raises(ValidationError, match="lambda"):
        replace(cfg, lam=0.5)
    # lambda = 1 is a valid degenerate sweep point
    assert replace(cfg, lam=1.0).lam == 1.0
    with pytest.raises(ValidationError):
        replace(cfg, bandwidth=0.0)


def test_raw_default_config_is_fresh_copy():
    raw = raw_default_config()
    raw["device_positions"][0][0] = 99.0
    assert raw_default_config()["device_positions"][0][0] == 0.0


def test_activation_vector():
    x = ActivationVector.from_active(4, (1, 3))
    assert x.bits == (0, 1, 0, 1)
    assert x.active == (1, 3)
    assert x.size == 2
    assert x.bitmask == 0b1010
    assert ActivationVector.from_bitmask(4, 0b1010) == x
    assert x.flipped([0, 3]).active == (0, 1)
    with pytest.raises(ValidationError):
        ActivationVector((0, 2))


def test_vote_threshold():
    assert vote_threshold(1) == 1
    assert vote_threshold(2) == 1
    assert vote_threshold(5) == 2
    assert vote_threshold(8) == 4


def test_pairwise_angle_orthogonal(cfg):
    # devices at (0,5) and (10,5) seen from the target (5,0)
    assert pairwise_angle(cfg, 0, 1) == pytest.approx(math.pi / 2)


def test_pairwise_angle_derived(cfg):
    # independent dot-product computation: (-5,5).(5,0) -> 3*pi/4
    assert pairwise_angle(cfg, 0, 2) == pytest.approx(3 * math.pi / 4)


def test_pairwise_angle_errors(cfg):
    with pytest.raises(IndexError):
        pairwise_angle(cfg, 0, 17)
    with pytest.raises(DomainError):
        pairwise_angle(cfg, 3, 3)


@given(st.integers(0, 7), st.integers(0, 7))
def test_pairwise_angle_symmetric(i, j):
    cfg = default_scenario()
    if i == j:
        return
    assert pairwise_angle(cfg, i, j) == pytest.approx(pairwise_angle(cfg, j, i))


def test_aspect_cos_examples(cfg):
    # line of sight from device 2 at (10,0) to the target (5,0) is the -x axis
    assert aspect_cos(cfg, 2, math.pi) == pytest.approx(1.0)
    assert aspect_cos(cfg, 2, math.pi / 2) == pytest.approx(0.0, abs=1e-12)
    # device 0 at (0,5): |cos| against motion along +x is 5/sqrt(50)
    assert aspect_cos(cfg, 0, 0.0) == pytest.approx(5 / math.sqrt(50))


@given(st.integers(0, 7), st.floats(0, 2 * math.pi))
def test_aspect_cos_pi_invariance(i, motion):
    cfg = default_scenario()
    assert aspect_cos(cfg, i, motion) == pytest.approx(
        aspect_cos(cfg, i, motion + math.pi), abs=1e-9)
