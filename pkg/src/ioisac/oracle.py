"""Independent brute-force references: Monte-Carlo fusion simulation, power
grid search, and exhaustive matching.

These exist to check the analytic paths and deliberately re-derive every
quantity from first principles instead of calling the code under test.  They
are slow by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .errors import Infeasible, SizeLimit
from .phy import compute_phy_state, sensing_sinr
from .scenario import ActivationVector, ScenarioConfig, vote_threshold

_MC_CHUNK = 200_000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self) -> None:
        assert self.trials >= 1
        expected = math.sqrt(self.mean * (1.0 - self.mean) / self.trials)
        assert abs(self.stderr - expected) <= 1e-12


def monte_carlo_accuracy(cfg: ScenarioConfig, chans: ChannelSet,
                         x: ActivationVector, p, trials: int,
                         seed: int) -> McEstimate:
    """Simulate the fusion pipeline forward and score the global decision.

    Per trial: draw the hypothesis from the priors and a uniform motion
    direction, mark each active device qualified when its sensing SINR clears
    ``beta`` and its line of sight is within the aspect window, draw the
    binary verdicts from the effective error probabilities, apply the voting
    rule, and count correct global decisions.  Uses a counter-based (Philox)
    generator so a fixed seed reproduces exactly and trial blocks can be
    partitioned across workers.
    """
    if trials < 1:
        raise SizeLimit("monte_carlo_accuracy needs at least one trial")
    active = list(x.active)
    m = len(active)
    gamma = vote_threshold(m)
    # Same relative slack as the analytic path: threshold-exact powers qualify.
    sinr_ok = sensing_sinr(cfg, chans, x, p)[active] >= cfg.beta * (1.0 - 1e-9)

    # Unit line-of-sight vectors device -> target, derived straight from the
    # geometry rather than through the scenario helpers.
    pos = np.asarray(cfg.device_positions, dtype=float)[active]
    los = np.asarray(cfg.target_position, dtype=float) - pos
    los /= np.linalg.norm(los, axis=1, keepdims=True)

    rng = np.random.Generator(np.random.Philox(key=seed))
    correct = 0
    remaining = int(trials)
    while remaining > 0:
        block = min(remaining, _MC_CHUNK)
        is_h1 = rng.random(block) < cfg.prior_h1
        motion = rng.uniform(0.0, 2.0 * np.pi, block)
        heading = np.stack([np.cos(motion), np.sin(motion)], axis=1)
        aspect_ok = np.abs(heading @ los.T) >= cfg.alpha
        qualified = aspect_ok & sinr_ok
        pf = np.where(qualified, cfg.p_f, cfg.lam * cfg.p_f)
        pm = np.where(qualified, cfg.p_m, cfg.lam * cfg.p_m)
        u = rng.random((block, m))
        votes = np.where(is_h1[:, None], u < 1.0 - pm, u < pf).sum(axis=1)
        correct += int(((votes >= gamma) == is_h1).sum())
        remaining -= block

    mean = correct / trials
    return McEstimate(mean=mean, stderr=math.sqrt(mean * (1.0 - mean) / trials),
                      trials=int(trials), seed=seed)


def grid_power_oracle(cfg: ScenarioConfig, chans: ChannelSet,
                      x: ActivationVector, grid_points: int) -> float:
    """Best min communication SINR found by a dense grid over the comm powers.

    Sensing powers are pinned at the minimal threshold-achieving level for
    each grid point (recomputed here from the SINR definitions).  Hard-capped
    at three active devices.
    """
    active = list(x.active)
    m = len(active)
    if m > 3:
        raise SizeLimit(f"grid oracle capped at 3 active devices, got {m}")
    if grid_points ** m > 2e7:
        raise SizeLimit(f"grid of {grid_points}^{m} points is too large")
    state = compute_phy_state(cfg, chans, active)
    cross = np.array([[abs(chans.c[j, i]) ** 2 if j != i else 0.0
                       for i in active] for j in active])

    axes = [np.linspace(0.0, cfg.p_max, grid_points)] * m
    mesh = np.meshgrid(*axes, indexing="ij")
    p_c = np.stack([g.ravel() for g in mesh], axis=1)       # (G^m, m)
    interference = p_c @ cross                              # column i: sum_j != i
    p_s = cfg.beta * (cfg.noise_sense + interference) / state.a
    per_device = p_s + p_c
    ok = np.all(per_device <= cfg.p_max + 1e-12, axis=1) \
        & (per_device.sum(axis=1) <= cfg.p_sum + 1e-12)
    if not ok.any():
        raise Infeasible("no grid point satisfies the budgets")
    return float(np.min(p_c[ok] * state.gamma_c, axis=1).max())


def brute_matching(edges, n_nodes: int) -> int:
    """Maximum matching size by exhaustive search with memoized node masks."""
    if n_nodes > 16:
        raise SizeLimit(f"brute matching capped at 16 nodes, got {n_nodes}")
    adj = [[] for _ in range(n_nodes)]
    for u, v in edges:
        if u == v:
            continue
        adj[u].append(v)
        adj[v].append(u)

    memo: dict[int, int] = {}

    def best(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        v = 0
        while v < n_nodes and mask & (1 << v):
            v += 1
        if v == n_nodes:
            return 0
        # Either leave v unmatched or pair it with any free neighbor.
        result = best(mask | (1 << v))
        for u in adj[v]:
            if not mask & (1 << u):
                result = max(result, 1 + best(mask | (1 << v) | (1 << u)))
        memo[mask] = result
        return result

    return best(0)
