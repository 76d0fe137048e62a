"""End-to-end latency upper bound: slowest uplink plus server compute time.

Sensing and data upload run simultaneously and the upload dominates, so the
air-time term is the worst active device's transfer time; the server then
spends n_flop/compute_speed per sample on |S| samples.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptySet, ZeroRate
from .scenario import ScenarioConfig


@dataclass(frozen=True)
class LatencyBreakdown:
    t_comm: float   # s, max over active devices of data_bits / (bandwidth * rate)
    t_comp: float   # s, |S| * n_flop / compute_speed

    @property
    def total(self) -> float:
        return self.t_comm + self.t_comp


def latency_upper_bound(cfg: ScenarioConfig, rates, active) -> LatencyBreakdown:
    """Latency bound for one inference round.

    ``rates`` holds per-device spectral efficiencies (bps/Hz), indexed by
    device; only the entries of ``active`` are read.
    """
    active = tuple(active)
    if not active:
        raise EmptySet("latency bound needs at least one active device")
    dead = [i for i in active if rates[i] <= 0.0]
    if dead:
        raise ZeroRate(f"active device(s) {dead} have zero rate; latency unbounded")
    t_comm = max(cfg.data_bits / (cfg.bandwidth * rates[i]) for i in active)
    t_comp = len(active) * cfg.n_flop / cfg.compute_speed
    return LatencyBreakdown(t_comm=t_comm, t_comp=t_comp)
