"""Joint power allocation and device scheduling.

Two tiers: ``optimal_jpads`` enumerates every activation vector, solves the
inner max-min power problem for each, and keeps the non-dominated
(error bound, latency bound) pairs; ``fast_jpads`` is a seeded local search
on the weighted-sum objective that flips a few activation bits per step and
only accepts non-worsening moves.  Both share an :class:`Evaluator` that
memoizes per-activation results, since the same activation vectors recur
heavily.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .errors import AllInfeasible, DomainError, EmptySet, Infeasible
from .fusion import accuracy_lower_bound
from .latency import LatencyBreakdown, latency_upper_bound
from .palloc import PowerAllocation, solve_p2
from .phy import PhyCache, comm_sinr, sensing_sinr, spectral_efficiency
from .scenario import ActivationVector, ScenarioConfig

ENUMERATION_CAP = 20  # exhaustive search is 2^N evaluations


@dataclass(frozen=True)
class EvalPoint:
    """One activation vector with its allocation, SINRs and objective pair."""

    x: ActivationVector
    allocation: PowerAllocation
    error_lb_comp: float        # 1 - guaranteed accuracy, to be minimized
    latency: LatencyBreakdown
    t_star: float
    sensing_sinr: np.ndarray
    comm_sinr: np.ndarray

    @property
    def latency_ub(self) -> float:
        return self.latency.total

    @property
    def accuracy_lb(self) -> float:
        return 1.0 - self.error_lb_comp

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.error_lb_comp, self.latency_ub)

    def __post_init__(self) -> None:
        assert 0.0 <= self.error_lb_comp <= 1.0
        assert self.latency.total > 0.0


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated evaluation points sorted by latency, with provenance."""

    points: tuple[EvalPoint, ...]
    provenance: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.points)


def evaluate(cfg: ScenarioConfig, chans: ChannelSet, x: ActivationVector,
             cache: PhyCache | None = None) -> EvalPoint:
    """Solve the power problem for x and assemble both objective bounds."""
    if x.size < 1:
        raise EmptySet("evaluate needs at least one active device")
    state = cache.state(x.active) if cache is not None else None
    solution = solve_p2(cfg, chans, x, cache=cache)
    alloc = solution.allocation
    sinr_s = sensing_sinr(cfg, chans, x, alloc, state=state)
    sinr_c = comm_sinr(cfg, chans, x, alloc, state=state)
    rates = spectral_efficiency(sinr_c)
    lat = latency_upper_bound(cfg, rates, x.active)
    acc = accuracy_lower_bound(cfg, chans, x, alloc, state=state)
    return EvalPoint(x=x, allocation=alloc, error_lb_comp=1.0 - acc,
                     latency=lat, t_star=solution.t_star,
                     sensing_sinr=sinr_s, comm_sinr=sinr_c)


class Evaluator:
    """Memoized evaluate() over a fixed (config, channel set)."""

    def __init__(self, cfg: ScenarioConfig, chans: ChannelSet,
                 phy_cache: PhyCache | None = None):
        self.cfg = cfg
        self.chans = chans
        self.phy_cache = phy_cache or PhyCache(cfg, chans)
        self._points: dict[int, EvalPoint | None] = {}  # None marks infeasible

    def point(self, x: ActivationVector) -> EvalPoint:
        key = x.bitmask
        if key not in self._points:
            try:
                self._points[key] = evaluate(self.cfg, self.chans, x,
                                             cache=self.phy_cache)
            except Infeasible:
                self._points[key] = None
        hit = self._points[key]
        if hit is None:
            raise Infeasible(f"activation {x.bits} admits no feasible allocation")
        return hit


def _dominates(a: EvalPoint, b: EvalPoint) -> bool:
    ae, al = a.objectives
    be, bl = b.objectives
    return ae <= be and al <= bl and (ae < be or al < bl)


def pareto_filter(points, provenance=None) -> ParetoFront:
    """Maximal non-dominated subset; objective ties keep the smallest x."""
    points = list(points)
    provenance = list(provenance) if provenance is not None \
        else ["unspecified"] * len(points)
    keep = []
    for i, p in enumerate(points):
        dominated = False
        for j, q in enumerate(points):
            if j == i:
                continue
            if _dominates(q, p):
                dominated = True
                break
            if q.objectives == p.objectives:
                # Tie break: lexicographically smallest bits, then first seen.
                if q.x.bits < p.x.bits or (q.x.bits == p.x.bits and j < i):
                    dominated = True
                    break
        if not dominated:
            keep.append(i)
    keep.sort(key=lambda i: (points[i].latency_ub, points[i].error_lb_comp,
                             points[i].x.bits))
    return ParetoFront(points=tuple(points[i] for i in keep),
                       provenance=tuple(provenance[i] for i in keep))


def optimal_jpads(cfg: ScenarioConfig, chans: ChannelSet,
                  evaluator: Evaluator | None = None) -> ParetoFront:
    """Exhaustive activation enumeration followed by Pareto filtering."""
    n = cfg.n_devices
    if n > ENUMERATION_CAP:
        raise DomainError(f"exhaustive enumeration capped at N={ENUMERATION_CAP}")
    ev = evaluator or Evaluator(cfg, chans)
    found = []
    for mask in range(1, 1 << n):
        try:
            found.append(ev.point(ActivationVector.from_bitmask(n, mask)))
        except Infeasible:
            continue
    if not found:
        raise AllInfeasible("no activation vector admits a feasible allocation")
    return pareto_filter(found, ["enumeration"] * len(found))


def weighted_objective(point: EvalPoint, mu: float) -> float:
    """Weighted sum mu * error_bound + (1 - mu) * latency_bound, raw units."""
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"weight mu={mu} outside [0, 1]")
    return mu * point.error_lb_comp + (1.0 - mu) * point.latency_ub


def _initial_point(ev: Evaluator, rng: np.random.Generator,
                   attempts: int = 100) -> EvalPoint:
    """All-active start if feasible, else seeded random subsets, biggest first."""
    n = ev.cfg.n_devices
    try:
        return ev.point(ActivationVector.ones(n))
    except Infeasible:
        pass
    for attempt in range(attempts):
        size = n - (attempt % n)
        chosen = rng.choice(n, size=size, replace=False)
        try:
            return ev.point(ActivationVector.from_active(n, chosen.tolist()))
        except Infeasible:
            continue
    raise AllInfeasible("no feasible starting activation found")


def fast_jpads(cfg: ScenarioConfig, chans: ChannelSet, mu: float,
               max_iters: int = 10, flip_size: int = 2,
               resample_cap: int = 50, seed: int = 0,
               evaluator: Evaluator | None = None
               ) -> tuple[list[float], EvalPoint]:
    """Local search over activation vectors on the weighted-sum objective.

    A candidate is drawn uniformly from the radius-``flip_size`` ball around
    the current vector: pick a flip count in {1..flip_size}, then that many
    distinct coordinates (``flip_size`` >= 2 lets the search swap one device
    for another in a single move, which bit-by-bit descent cannot do without
    passing through a worse set).  Each iteration draws up to
    ``resample_cap`` candidates and moves to the first one whose objective
    does not increase; an exhausted iteration keeps the current vector.  Runs
    exactly ``max_iters`` iterations and returns the objective trajectory
    (length max_iters + 1, including the start) plus the final point.
    Deterministic given the seed.
    """
    n = cfg.n_devices
    if not 1 <= flip_size <= n:
        raise DomainError(f"flip_size={flip_size} outside [1, N={n}]")
    if max_iters < 1:
        raise DomainError("max_iters must be >= 1")
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"weight mu={mu} outside [0, 1]")
    ev = evaluator or Evaluator(cfg, chans)
    rng = np.random.default_rng(seed)

    current = _initial_point(ev, rng)
    score = weighted_objective(current, mu)
    trajectory = [score]
    for _ in range(max_iters):
        for _ in range(resample_cap):
            n_flips = int(rng.integers(1, flip_size + 1))
            flips = rng.choice(n, size=n_flips, replace=False)
            candidate_x = current.x.flipped(flips.tolist())
            if candidate_x.size == 0:
                continue
            try:
                candidate = ev.point(candidate_x)
            except Infeasible:
                continue
            candidate_score = weighted_objective(candidate, mu)
            if candidate_score <= score:
                current, score = candidate, candidate_score
                break
        trajectory.append(score)
    return trajectory, current


def error_latency_region(cfg: ScenarioConfig, chans: ChannelSet, mu_grid,
                         max_iters: int = 10, flip_size: int = 1,
                         seed: int = 0,
                         evaluator: Evaluator | None = None) -> ParetoFront:
    """Pool fast_jpads solutions across a weight grid and Pareto-filter them."""
    mu_grid = list(mu_grid)
    if not mu_grid:
        raise DomainError("mu_grid must be nonempty")
    ev = evaluator or Evaluator(cfg, chans)
    points, provenance = [], []
    for k, mu in enumerate(mu_grid):
        sub_seed = int(np.random.SeedSequence([seed, k]).generate_state(1)[0])
        _, best = fast_jpads(cfg, chans, mu, max_iters=max_iters,
                             flip_size=flip_size, seed=sub_seed, evaluator=ev)
        points.append(best)
        provenance.append(f"mu={mu:g}")
    return pareto_filter(points, provenance)
