"""Max-min communication SINR power allocation for a fixed active set.

For a communication-SINR level t there is a componentwise-minimal allocation
that reaches it: every active device needs exactly p_c = t / gamma_c, and its
sensing power must then lift the echo over the threshold ``beta`` against the
interference those communication signals create.  Both pieces are affine and
non-decreasing in t, so feasibility of the budgets is monotone in t and the
optimum is found by bisection; any allocation above the minimal one only
burns budget and raises interference, which is why checking the minimal
allocation suffices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .errors import EmptySet, Infeasible
from .phy import PhyCache, PhyState, compute_phy_state
from .scenario import ActivationVector, ScenarioConfig

_BUDGET_SLACK = 1e-12      # absolute slack on power budget comparisons, W
_REL_TOL = 1e-9            # bisection convergence, relative on t
_MAX_ITERS = 200
_BINDING_REL = 1e-6        # a constraint within this relative margin binds


@dataclass(frozen=True)
class PowerAllocation:
    """Per-device sensing and communication transmit powers in watts.

    Entries of inactive devices are zero.  Budget satisfaction is a property
    of solver outputs, not of the container.
    """

    p_s: np.ndarray
    p_c: np.ndarray

    @property
    def per_device(self) -> np.ndarray:
        return self.p_s + self.p_c

    @property
    def total(self) -> float:
        return float(self.per_device.sum())


@dataclass(frozen=True)
class P2Solution:
    allocation: PowerAllocation
    t_star: float                  # linear min communication SINR achieved
    binding: tuple[str, ...]       # budget constraints tight at the optimum


def min_powers_at(t: float, state: PhyState, chans: ChannelSet,
                  cfg: ScenarioConfig, active) -> PowerAllocation:
    """Componentwise-minimal allocation giving every active device comm SINR t.

    Budget feasibility is the caller's concern; the returned powers may
    exceed the caps.
    """
    active = tuple(sorted(active))
    n = cfg.n_devices
    p_s = np.zeros(n)
    p_c = np.zeros(n)
    for r, i in enumerate(active):
        p_c[i] = t / state.gamma_c[r]
    for r, i in enumerate(active):
        interference = sum(p_c[j] * abs(chans.c[j, i]) ** 2
                           for j in active if j != i)
        p_s[i] = cfg.beta * (cfg.noise_sense + interference) / state.a[r]
    return PowerAllocation(p_s=p_s, p_c=p_c)


def feasible(t: float, state: PhyState, chans: ChannelSet,
             cfg: ScenarioConfig, active) -> bool:
    """True iff the minimal allocation for level t fits both power budgets."""
    alloc = min_powers_at(t, state, chans, cfg, active)
    if np.any(~np.isfinite(alloc.per_device)):
        return False
    return (bool(np.all(alloc.per_device <= cfg.p_max + _BUDGET_SLACK))
            and alloc.total <= cfg.p_sum + _BUDGET_SLACK)


def solve_p2(cfg: ScenarioConfig, chans: ChannelSet, x: ActivationVector,
             cache: PhyCache | None = None) -> P2Solution:
    """Maximize the minimum communication SINR over the active set.

    Bisects the SINR level between 0 and an upper bound grown by doubling
    until infeasible.  Raises ``Infeasible`` when even t = 0 breaks a budget,
    i.e. the sensing threshold cannot be met at all.
    """
    active = x.active
    if not active:
        raise EmptySet("P2 needs at least one active device")
    state = cache.state(active) if cache is not None else \
        compute_phy_state(cfg, chans, active)

    if not feasible(0.0, state, chans, cfg, active):
        raise Infeasible(
            f"sensing threshold unreachable within budgets for active set {active}")

    t_hi = float(np.min(cfg.p_max * state.gamma_c))
    for _ in range(64):
        if not feasible(t_hi, state, chans, cfg, active):
            break
        t_hi *= 2.0
    else:  # pragma: no cover - p_s > 0 makes full-p_c levels infeasible
        raise Infeasible("no infeasible upper bracket found for bisection")

    t_lo = 0.0
    for _ in range(_MAX_ITERS):
        if t_hi - t_lo <= _REL_TOL * max(t_hi, 1e-300):
            break
        mid = 0.5 * (t_lo + t_hi)
        if feasible(mid, state, chans, cfg, active):
            t_lo = mid
        else:
            t_hi = mid

    alloc = min_powers_at(t_lo, state, chans, cfg, active)
    binding = []
    for i in active:
        if alloc.per_device[i] >= cfg.p_max * (1.0 - _BINDING_REL):
            binding.append(f"p_max[{i}]")
    if alloc.total >= cfg.p_sum * (1.0 - _BINDING_REL):
        binding.append("p_sum")
    # t could otherwise still grow: at least one budget must be tight.
    assert binding, "solve_p2 stopped with no binding budget constraint"
    return P2Solution(allocation=alloc, t_star=t_lo, binding=tuple(binding))
