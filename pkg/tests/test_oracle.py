import math

import numpy as np
import pytest

from ioisac import (ActivationVector, Infeasible, PowerAllocation, SizeLimit,
                    brute_matching, grid_power_oracle, monte_carlo_accuracy,
                    solve_p2)
from ioisac.oracle import McEstimate
from ioisac.scenario import config_from_raw, replace


def test_mc_estimate_invariant():
    est = McEstimate(mean=0.5, stderr=math.sqrt(0.25 / 100), trials=100, seed=0)
    assert est.stderr == pytest.approx(0.05)
    with pytest.raises(AssertionError):
        McEstimate(mean=0.5, stderr=0.9, trials=100, seed=0)


def test_mc_error_free_is_exact(cfg, chans):
    perfect = replace(cfg, p_f=0.0, p_m=0.0)
    x = ActivationVector.from_active(8, (0, 1, 4))
    sol = solve_p2(perfect, chans, x)
    est = monte_carlo_accuracy(perfect, chans, x, sol.allocation, 5000, 1)
    assert est.mean == 1.0
    assert est.stderr == 0.0


def test_mc_single_qualified_matches_closed_form(cfg, chans):
    # alpha -> 0 forces the aspect test to pass; a solved singleton clears the
    # SINR threshold, so accuracy reduces to the single-device model: 0.9
    forced = replace(cfg, alpha=1e-12)
    x = ActivationVector.single(8, 2)
    sol = solve_p2(forced, chans, x)
    est = monte_carlo_accuracy(forced, chans, x, sol.allocation, 1_000_000, 2)
    assert abs(est.mean - 0.9) <= 3 * est.stderr


def test_mc_determinism(cfg, chans, evaluator):
    x = ActivationVector.from_active(8, (0, 1))
    point = evaluator.point(x)
    a = monte_carlo_accuracy(cfg, chans, x, point.allocation, 20_000, 9)
    b = monte_carlo_accuracy(cfg, chans, x, point.allocation, 20_000, 9)
    assert a == b


def test_mc_bound_check(cfg, chans, evaluator):
    # Proposition-style guarantee: simulated accuracy never falls 3 sigma
    # below the analytic floor
    from ioisac import accuracy_lower_bound
    for active in ((0, 1), (0, 1, 4, 7), (2,)):
        x = ActivationVector.from_active(8, active)
        point = evaluator.point(x)
        est = monte_carlo_accuracy(cfg, chans, x, point.allocation, 100_000, 5)
        lb = accuracy_lower_bound(cfg, chans, x, point.allocation)
        assert est.mean >= lb - 3 * est.stderr


def test_mc_needs_trials(cfg, chans, evaluator):
    x = ActivationVector.single(8, 0)
    point = evaluator.point(x)
    with pytest.raises(SizeLimit):
        monte_carlo_accuracy(cfg, chans, x, point.allocation, 0, 1)


def test_grid_oracle_single_device_closed_form(cfg, chans):
    from ioisac import compute_phy_state
    x = ActivationVector.single(8, 2)
    state = compute_phy_state(cfg, chans, x.active)
    best = grid_power_oracle(cfg, chans, x, 2000)
    floor = cfg.beta * cfg.noise_sense / state.a[0]
    exact = state.gamma_c[0] * (min(cfg.p_max, cfg.p_sum) - floor)
    step = cfg.p_max / 1999
    assert best <= exact * (1 + 1e-9)
    assert exact - best <= state.gamma_c[0] * step


def test_grid_oracle_infeasible_agrees(cfg, chans):
    hard = replace(cfg, beta=1e9)
    x = ActivationVector.single(8, 7)
    with pytest.raises(Infeasible):
        grid_power_oracle(hard, chans, x, 100)
    with pytest.raises(Infeasible):
        solve_p2(hard, chans, x)


def test_grid_oracle_size_caps(cfg, chans):
    with pytest.raises(SizeLimit):
        grid_power_oracle(cfg, chans, ActivationVector.from_active(8, (0, 1, 2, 3)), 10)
    with pytest.raises(SizeLimit):
        grid_power_oracle(cfg, chans, ActivationVector.from_active(8, (0, 1, 2)), 5000)


def test_brute_matching_examples():
    assert brute_matching([(0, 1), (1, 2), (0, 2)], 3) == 1      # triangle
    assert brute_matching([(0, 1), (2, 3)], 4) == 2              # perfect
    assert brute_matching([], 5) == 0
    assert brute_matching([(0, 1), (1, 2), (2, 3)], 4) == 2      # path
    with pytest.raises(SizeLimit):
        brute_matching([(0, 1)], 17)


def test_brute_matching_agrees_with_blossom():
    import networkx as nx
    rng = np.random.default_rng(8)
    for _ in range(150):
        n = int(rng.integers(2, 11))
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < 0.35]
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        expect = len(nx.max_weight_matching(g, maxcardinality=True))
        assert brute_matching(edges, n) == expect
