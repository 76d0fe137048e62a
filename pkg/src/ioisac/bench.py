"""Benchmark schemes and parameter sweeps.

Schemes: the proposed scheduler (``io-isac``, local search at weight 0.5, and
``io-isac-2`` at weight 0.2 favoring latency), a single fixed device, the
all-devices baseline with an equal power split, and a sequential baseline
that senses first (no co-functionality interference) and uploads afterwards.
Sweeps re-solve every scheme across a parameter grid and report the
guaranteed accuracy bound next to a Monte-Carlo estimate of the realized
accuracy.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelSet, strip_comm_interference
from .errors import AllInfeasible, DomainError, Infeasible
from .fusion import accuracy_lower_bound
from .jpads import EvalPoint, Evaluator, fast_jpads
from .latency import LatencyBreakdown, latency_upper_bound
from .oracle import monte_carlo_accuracy
from .palloc import PowerAllocation
from .phy import comm_sinr, sensing_sinr, spectral_efficiency
from .scenario import ActivationVector, ScenarioConfig, db_to_linear, mw_to_watt

DEFAULT_SINGLE_DEVICE = 5       # device 6 in 1-based numbering
DEFAULT_SENSING_DWELL = 0.05    # s
SCHEME_NAMES = ("io-isac", "io-isac-2", "single", "all", "sequential")
_SCHEME_MU = {"io-isac": 0.5, "io-isac-2": 0.2}


def scheme_io_isac(cfg: ScenarioConfig, chans: ChannelSet, mu: float = 0.5,
                   max_iters: int = 10, flip_size: int = 1, seed: int = 0,
                   evaluator: Evaluator | None = None) -> EvalPoint:
    """The proposed scheme: local-search scheduling plus max-min powers."""
    _, best = fast_jpads(cfg, chans, mu, max_iters=max_iters,
                         flip_size=flip_size, seed=seed, evaluator=evaluator)
    return best


def scheme_single_device(cfg: ScenarioConfig, chans: ChannelSet, device: int,
                         evaluator: Evaluator | None = None) -> EvalPoint:
    """Activate one fixed device; no angle pair exists, so the accuracy floor
    uses zero guaranteed-qualified devices."""
    ev = evaluator or Evaluator(cfg, chans)
    return ev.point(ActivationVector.single(cfg.n_devices, device))


def scheme_all_devices(cfg: ScenarioConfig, chans: ChannelSet) -> EvalPoint:
    """Everything on, budget split evenly between sensing and communication.

    The max-min solver is typically infeasible with all devices active (the
    co-device interference pushes sensing below threshold), so this baseline
    uses p_s = p_c = min(p_max, p_sum/N)/2 per device; devices missing the
    threshold simply count as degraded in the accuracy bound.
    """
    n = cfg.n_devices
    x = ActivationVector.ones(n)
    each = min(cfg.p_max, cfg.p_sum / n) / 2.0
    alloc = PowerAllocation(p_s=np.full(n, each), p_c=np.full(n, each))
    sinr_s = sensing_sinr(cfg, chans, x, alloc)
    sinr_c = comm_sinr(cfg, chans, x, alloc)
    rates = spectral_efficiency(sinr_c)
    lat = latency_upper_bound(cfg, rates, x.active)
    acc = accuracy_lower_bound(cfg, chans, x, alloc)
    return EvalPoint(x=x, allocation=alloc, error_lb_comp=1.0 - acc,
                     latency=lat, t_star=float(sinr_c[list(x.active)].min()),
                     sensing_sinr=sinr_s, comm_sinr=sinr_c)


def scheme_sequential_edge(cfg: ScenarioConfig, chans: ChannelSet,
                           sensing_dwell: float = DEFAULT_SENSING_DWELL,
                           mu: float = 0.5, max_iters: int = 10,
                           flip_size: int = 1, seed: int = 0,
                           evaluator: Evaluator | None = None) -> EvalPoint:
    """Sense-then-upload baseline with the same scheduler and powers.

    Activation and powers come from the same local-search run as the
    proposed scheme; sensing happens alone during ``sensing_dwell`` seconds
    (so the sensing SINR sees no communication interference when the quality
    bound is evaluated), then the upload and compute stages follow, adding
    the dwell on top of the usual latency.
    """
    if sensing_dwell < 0:
        raise DomainError("sensing_dwell must be non-negative")
    base = scheme_io_isac(cfg, chans, mu=mu, max_iters=max_iters,
                          flip_size=flip_size, seed=seed, evaluator=evaluator)
    quiet = strip_comm_interference(chans)
    acc = accuracy_lower_bound(cfg, quiet, base.x, base.allocation)
    sinr_s = sensing_sinr(cfg, quiet, base.x, base.allocation)
    lat = LatencyBreakdown(t_comm=sensing_dwell + base.latency.t_comm,
                           t_comp=base.latency.t_comp)
    return EvalPoint(x=base.x, allocation=base.allocation,
                     error_lb_comp=1.0 - acc, latency=lat, t_star=base.t_star,
                     sensing_sinr=sinr_s, comm_sinr=base.comm_sinr)


# --- sweeps ------------------------------------------------------------------

# Swept parameters take values in config-file units (mW, dB) and map onto the
# linear config fields.
_PARAMS = {
    "psum": ("p_sum", mw_to_watt),
    "pmax": ("p_max", mw_to_watt),
    "lambda": ("lam", float),
    "beta": ("beta", db_to_linear),
}


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    param: str
    value: float                  # in config-file units
    mc_accuracy: float            # NaN when infeasible
    mc_stderr: float
    accuracy_lb: float
    latency_ub: float
    active: tuple[int, ...]
    note: str = ""


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    _FIELDS = ("scheme", "param", "value", "mc_accuracy", "mc_stderr",
               "accuracy_lb", "latency_ub_s", "active_set", "note")

    def to_csv(self, path, fmt=lambda v: f"{v:.12g}") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self._FIELDS)
            for r in self.rows:
                writer.writerow([
                    r.scheme, r.param, fmt(r.value), fmt(r.mc_accuracy),
                    fmt(r.mc_stderr), fmt(r.accuracy_lb), fmt(r.latency_ub),
                    "|".join(str(i) for i in r.active), r.note,
                ])

    def to_json(self, path) -> None:
        doc = [{"scheme": r.scheme, "param": r.param, "value": r.value,
                "mc_accuracy": r.mc_accuracy, "mc_stderr": r.mc_stderr,
                "accuracy_lb": r.accuracy_lb, "latency_ub_s": r.latency_ub,
                "active_set": list(r.active), "note": r.note}
               for r in self.rows]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)


def _run_scheme(scheme: str, cfg: ScenarioConfig, chans: ChannelSet,
                seed: int, single_device: int,
                sensing_dwell: float) -> tuple[EvalPoint, ChannelSet]:
    """Returns the scheme's point plus the channel view its accuracy lives in."""
    if scheme in _SCHEME_MU:
        return scheme_io_isac(cfg, chans, mu=_SCHEME_MU[scheme], seed=seed), chans
    if scheme == "single":
        return scheme_single_device(cfg, chans, single_device), chans
    if scheme == "all":
        return scheme_all_devices(cfg, chans), chans
    if scheme == "sequential":
        return (scheme_sequential_edge(cfg, chans, sensing_dwell, seed=seed),
                strip_comm_interference(chans))
    raise DomainError(f"unknown scheme '{scheme}'; choose from {SCHEME_NAMES}")


def sweep(cfg: ScenarioConfig, chans: ChannelSet, schemes, parameter: str,
          values, trials: int = 100_000, seed: int = 0,
          single_device: int = DEFAULT_SINGLE_DEVICE,
          sensing_dwell: float = DEFAULT_SENSING_DWELL) -> SweepResult:
    """Evaluate every scheme at every parameter value.

    Infeasible cells are recorded in-row (NaN metrics) and the sweep
    continues.  Channels are held fixed across cells; the swept parameters
    only change budgets and thresholds, never the propagation.
    """
    if parameter not in _PARAMS:
        raise DomainError(f"unknown sweep parameter '{parameter}'; "
                          f"choose from {sorted(_PARAMS)}")
    field_name, convert = _PARAMS[parameter]
    schemes = list(schemes)
    unknown = [s for s in schemes if s not in SCHEME_NAMES]
    if unknown:
        raise DomainError(f"unknown scheme(s) {unknown}; choose from {SCHEME_NAMES}")

    rows = []
    for vi, value in enumerate(values):
        cfg_v = replace(cfg, **{field_name: convert(value)})
        for si, scheme in enumerate(schemes):
            cell_seed = int(np.random.SeedSequence([seed, vi, si]).generate_state(1)[0])
            try:
                point, acc_chans = _run_scheme(scheme, cfg_v, chans, cell_seed,
                                               single_device, sensing_dwell)
                est = monte_carlo_accuracy(cfg_v, acc_chans, point.x,
                                           point.allocation, trials, cell_seed)
                rows.append(SweepRow(
                    scheme=scheme, param=parameter, value=float(value),
                    mc_accuracy=est.mean, mc_stderr=est.stderr,
                    accuracy_lb=point.accuracy_lb, latency_ub=point.latency_ub,
                    active=point.x.active))
            except (Infeasible, AllInfeasible) as exc:
                rows.append(SweepRow(
                    scheme=scheme, param=parameter, value=float(value),
                    mc_accuracy=math.nan, mc_stderr=math.nan,
                    accuracy_lb=math.nan, latency_ub=math.nan,
                    active=(), note=f"infeasible: {exc}"))
    return SweepResult(rows=tuple(rows))
