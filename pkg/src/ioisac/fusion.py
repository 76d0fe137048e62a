"""Multi-view decision fusion: device error model, exact voting accuracy,
angle-diversity matrix, maximum matching, and the guaranteed accuracy floor.

Each active device reports a binary verdict; the server declares "abnormal"
when at least ``vote_threshold(|S|)`` devices do.  A device is *qualified*
when its sensing SINR clears the threshold ``beta`` and its aspect-angle
cosine clears ``alpha``; otherwise its error probabilities inflate by the
factor ``lam``.  The accuracy floor is motion-direction free: a maximum
matching over device pairs whose intersection angle lies in [pi/3, 2pi/3]
counts how many devices are guaranteed qualified no matter where the target
moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .channel import ChannelSet
from .errors import DomainError
from .phy import PhyState, sensing_sinr
from .scenario import ActivationVector, ScenarioConfig, pairwise_angle, vote_threshold

ANGLE_WINDOW = (np.pi / 3.0, 2.0 * np.pi / 3.0)

# Relative slack on the sensing-SINR threshold test: the power solver places
# devices exactly on the threshold, so a strict >= would flip on rounding.
SINR_QUALIFY_RTOL = 1e-9


def effective_error_probs(cfg: ScenarioConfig, qualified: bool) -> tuple[float, float]:
    """(false alarm, missed detection) probabilities for one device."""
    if qualified:
        return cfg.p_f, cfg.p_m
    return cfg.lam * cfg.p_f, cfg.lam * cfg.p_m


@dataclass(frozen=True)
class QualityProfile:
    """Qualified flags and effective error probabilities per active device."""

    devices: tuple[int, ...]
    qualified: tuple[bool, ...]
    pf_eff: tuple[float, ...]
    pm_eff: tuple[float, ...]

    @classmethod
    def build(cls, cfg: ScenarioConfig, devices, qualified) -> "QualityProfile":
        probs = [effective_error_probs(cfg, q) for q in qualified]
        return cls(devices=tuple(devices), qualified=tuple(bool(q) for q in qualified),
                   pf_eff=tuple(p[0] for p in probs), pm_eff=tuple(p[1] for p in probs))


def single_device_accuracy(qualified: bool, cfg: ScenarioConfig) -> float:
    """P(H0)(1 - pf_eff) + P(H1)(1 - pm_eff) for one device."""
    pf, pm = effective_error_probs(cfg, qualified)
    return cfg.prior_h0 * (1.0 - pf) + cfg.prior_h1 * (1.0 - pm)


def _vote_count_dist(probs) -> np.ndarray:
    """Exact pmf of the number of positive votes for independent Bernoulli probs."""
    dist = np.zeros(len(probs) + 1)
    dist[0] = 1.0
    for p in probs:
        dist[1:] = dist[1:] * (1.0 - p) + dist[:-1] * p
        dist[0] *= 1.0 - p
    return dist


def fusion_accuracy_exact(s_size: int, z: int, cfg: ScenarioConfig,
                          gamma: int) -> float:
    """Exact fused accuracy with z qualified and s_size - z degraded devices.

    Convolves the two independent device groups into the distribution of the
    positive-vote count under each hypothesis, then applies the voting rule
    (declare abnormal iff at least ``gamma`` positives).  This is the
    canonical accuracy used by every optimizer and bound in the package.
    """
    if not 0 <= z <= s_size:
        raise DomainError(f"qualified count z={z} outside [0, {s_size}]")
    if not 1 <= gamma <= s_size:
        raise DomainError(f"vote threshold gamma={gamma} outside [1, {s_size}]")
    pf_q, pm_q = effective_error_probs(cfg, True)
    pf_d, pm_d = effective_error_probs(cfg, False)
    # Positive-vote probability per device: false alarm under H0, detection under H1.
    dist_h0 = _vote_count_dist([pf_q] * z + [pf_d] * (s_size - z))
    dist_h1 = _vote_count_dist([1.0 - pm_q] * z + [1.0 - pm_d] * (s_size - z))
    p_correct_h0 = float(dist_h0[:gamma].sum())
    p_correct_h1 = float(dist_h1[gamma:].sum())
    return cfg.prior_h0 * p_correct_h0 + cfg.prior_h1 * p_correct_h1


def _pow(base: float, exp: int) -> float:
    # Exponent 0 is always an inert factor (including 0**0); a zero base with
    # a negative exponent is likewise treated as inert -- the verbatim
    # closed form below produces such factors (see its docstring).
    if exp == 0 or (base == 0.0 and exp < 0):
        return 1.0
    return base ** exp


def fusion_accuracy_closed_form(s_size: int, z: int, cfg: ScenarioConfig,
                                gamma: int) -> float:
    """Literal transcription of the published closed-form voting accuracy.

    Kept only as a cross-check: its printed exponents are internally
    inconsistent (they can go negative, and the H0 branch mixes in missed-
    detection factors), so its output can leave [0, 1].  Optimizers must use
    ``fusion_accuracy_exact``; ``cli validate`` reports the discrepancy
    between the two instead of hiding it.
    """
    if not 0 <= z <= s_size:
        raise DomainError(f"qualified count z={z} outside [0, {s_size}]")
    if not 1 <= gamma <= s_size:
        raise DomainError(f"vote threshold gamma={gamma} outside [1, {s_size}]")
    from math import comb

    pf, pm, lam = cfg.p_f, cfg.p_m, cfg.lam

    def branch(n_lo: int, term) -> float:
        total = 0.0
        for n in range(n_lo, s_size + 1):
            k1 = max(0, n - s_size + z)
            k2 = min(z, n)
            for k in range(k1, k2 + 1):
                total += comb(z, k) * comb(s_size - z, n - k) * term(n, k)
        return total

    def p1(n: int, k: int) -> float:
        return (_pow(1.0 - pf, k) * _pow(1.0 - lam * pf, n - k)
                * _pow(pm, z - k) * _pow(lam * pm, s_size - z - n + k))

    def p2(n: int, k: int) -> float:
        return (_pow(1.0 - pm, k) * _pow(1.0 - lam * pm, n - k)
                * _pow(pf, s_size - z - k) * _pow(lam * pf, s_size - z - n + k))

    return (cfg.prior_h0 * branch(gamma, p1)
            + cfg.prior_h1 * branch(s_size - gamma + 1, p2))


@dataclass(frozen=True)
class DiversityMatrix:
    """Antisymmetric {-1, 0, +1} matrix over the SINR-qualified devices.

    t[r, s] is nonzero iff the intersection angle of the r-th and s-th
    qualified devices falls in [pi/3, 2pi/3] (boundaries inclusive), with the
    sign fixed by the device-index order.
    """

    devices: tuple[int, ...]
    t: np.ndarray

    def edges(self) -> list[tuple[int, int]]:
        """Qualified-device index pairs connected by the angle window."""
        rows, cols = np.nonzero(np.triu(self.t))
        return [(self.devices[r], self.devices[s]) for r, s in zip(rows, cols)]


def build_diversity_matrix(cfg: ScenarioConfig, qualified) -> DiversityMatrix:
    devices = tuple(sorted(set(qualified)))
    m = len(devices)
    t = np.zeros((m, m), dtype=int)
    lo, hi = ANGLE_WINDOW
    for r in range(m):
        for s in range(r + 1, m):
            theta = pairwise_angle(cfg, devices[r], devices[s])
            if lo <= theta <= hi:
                t[r, s] = 1
                t[s, r] = -1
    t.setflags(write=False)
    return DiversityMatrix(devices=devices, t=t)


def max_matching(div: DiversityMatrix) -> int:
    """Maximum matching size of the graph whose edges are the nonzero pairs."""
    graph = nx.Graph()
    graph.add_nodes_from(div.devices)
    graph.add_edges_from(div.edges())
    return len(nx.max_weight_matching(graph, maxcardinality=True))


def rank_half(div: DiversityMatrix) -> int:
    """Half the numerical rank of the diversity matrix.

    The rank of an antisymmetric matrix is even; this is the published proxy
    for the matching number and is kept as a cross-check.  It never exceeds
    the matching number, but the fixed +-1 instantiation can rank strictly
    below it on some graphs, which is why the matching itself is canonical.
    """
    if div.t.size == 0:
        return 0
    return int(np.linalg.matrix_rank(div.t)) // 2


def accuracy_lower_bound(cfg: ScenarioConfig, chans: ChannelSet,
                         x: ActivationVector, p,
                         state: PhyState | None = None) -> float:
    """Guaranteed fused accuracy, worst case over the target motion direction.

    Devices clearing the sensing-SINR threshold form the qualified pool Q;
    a maximum matching over Q's angle-diverse pairs guarantees that many
    devices keep nominal error probabilities for every motion direction, and
    the exact voting accuracy is evaluated at that guaranteed count.
    """
    active = x.active
    sinr = sensing_sinr(cfg, chans, x, p, state=state)
    pool = [i for i in active if sinr[i] >= cfg.beta * (1.0 - SINR_QUALIFY_RTOL)]
    z = max_matching(build_diversity_matrix(cfg, pool))
    return fusion_accuracy_exact(len(active), z, cfg, vote_threshold(len(active)))
