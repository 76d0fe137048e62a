"""Seeded generation of all random channels with path loss and Rician fading.

Every link gets its own RNG substream derived from (seed, link kind, link
indices), so adding or moving one device never perturbs the draws of the
others.  Small-scale coefficients are normalized to unit mean-square
magnitude; large-scale attenuation is a power-law path loss on the link
distance.  The echo link device -> target -> device uses the path-loss law
with a doubled exponent (round trip), with the radar cross-section absorbed
into a unit constant.

Link distances are clamped below at 1 m (the path-loss reference distance):
the default scenario contains a deliberately co-located device pair, and the
far-field power law is meaningless below the reference distance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .scenario import ScenarioConfig

_MIN_LINK_DISTANCE = 1.0

# Link kinds, used as part of the per-link RNG substream key.
_ECHO, _SENSE_XLINK, _COMM_XLINK, _UPLINK = range(4)


def pathloss_gain(distance: float, ref_db: float, exponent: float) -> float:
    """Linear power gain 10^(-ref_db/10) * distance^(-exponent)."""
    if distance <= 0:
        raise DomainError(f"path loss undefined for distance {distance} <= 0")
    return 10.0 ** (-ref_db / 10.0) * distance ** (-exponent)


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all random channels for a scenario.

    g[i]    : (n_sense_ant,) echo channel of device i (device -> target -> device)
    q[j, i] : (n_sense_ant,) sensing interference channel, device j -> device i
    c[j, i] : scalar communication interference channel, device j -> device i
    h[i]    : (n_server_ant,) uplink channel, device i -> server

    The diagonals q[i, i] and c[i, i] are zero.  Arrays are read-only.
    """

    g: np.ndarray
    q: np.ndarray
    c: np.ndarray
    h: np.ndarray
    seed: int

    @property
    def n_devices(self) -> int:
        return self.g.shape[0]


def _link_rng(seed: int, kind: int, a: int, b: int) -> np.random.Generator:
    # The entropy sequence hashes to a unique substream per (seed, link).
    return np.random.default_rng([seed, kind, a, b])


def _steering(n_ant: int, bearing: float, distance: float) -> np.ndarray:
    """Deterministic line-of-sight phases: half-wavelength ULA at a unit
    normalized wavelength, plus the propagation phase of the link."""
    phases = 2.0 * math.pi * distance + math.pi * np.arange(n_ant) * math.sin(bearing)
    return np.exp(1j * phases)


def _rician(rng: np.random.Generator, k_lin: float, los: np.ndarray) -> np.ndarray:
    """Unit mean-square small-scale coefficients around a deterministic LOS term."""
    if math.isinf(k_lin):
        return los.astype(complex)
    scatter = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) \
        / math.sqrt(2.0)
    return math.sqrt(k_lin / (k_lin + 1.0)) * los + math.sqrt(1.0 / (k_lin + 1.0)) * scatter


def gen_channels(cfg: ScenarioConfig, seed: int | None = None) -> ChannelSet:
    """Draw one ChannelSet; a pure function of (cfg, seed).

    Defaults to ``cfg.seed``.  Identical inputs reproduce a bit-identical
    result, and the returned arrays are immutable.
    """
    if seed is None:
        seed = cfg.seed
    n = cfg.n_devices
    ns, ne = cfg.n_sense_ant, cfg.n_server_ant
    ref, exp = cfg.pathloss_ref_db, cfg.pathloss_exponent
    k_lin = 10.0 ** (cfg.rician_k_db / 10.0) if math.isfinite(cfg.rician_k_db) \
        else math.inf
    pos = np.asarray(cfg.device_positions, dtype=float)
    target = np.asarray(cfg.target_position, dtype=float)
    server = np.asarray(cfg.server_position, dtype=float)

    def link(delta: np.ndarray) -> tuple[float, float]:
        d = max(float(np.hypot(*delta)), _MIN_LINK_DISTANCE)
        return d, math.atan2(delta[1], delta[0])

    g = np.zeros((n, ns), dtype=complex)
    q = np.zeros((n, n, ns), dtype=complex)
    c = np.zeros((n, n), dtype=complex)
    h = np.zeros((n, ne), dtype=complex)

    for i in range(n):
        d, bearing = link(target - pos[i])
        amp = math.sqrt(pathloss_gain(d, ref, 2.0 * exp))
        g[i] = amp * _rician(_link_rng(seed, _ECHO, i, i), k_lin, _steering(ns, bearing, d))

        d, bearing = link(pos[i] - server)
        amp = math.sqrt(pathloss_gain(d, ref, exp))
        h[i] = amp * _rician(_link_rng(seed, _UPLINK, i, i), k_lin, _steering(ne, bearing, d))

    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            d, bearing = link(pos[i] - pos[j])
            amp = math.sqrt(pathloss_gain(d, ref, exp))
            q[j, i] = amp * _rician(_link_rng(seed, _SENSE_XLINK, j, i), k_lin,
                                    _steering(ns, bearing, d))
            los = np.exp(1j * 2.0 * math.pi * d)
            c[j, i] = amp * _rician(_link_rng(seed, _COMM_XLINK, j, i), k_lin,
                                    np.asarray(los))

    for arr in (g, q, c, h):
        arr.setflags(write=False)
    return ChannelSet(g=g, q=q, c=c, h=h, seed=seed)


def strip_comm_interference(chans: ChannelSet) -> ChannelSet:
    """Copy with all device-to-device communication channels zeroed.

    Models sequential operation: while sensing, nobody transmits data, so the
    sensing SINR sees no communication interference.  The uplink channels are
    untouched.
    """
    c = np.zeros_like(chans.c)
    c.setflags(write=False)
    return replace(chans, c=c)


# --- JSON export/import (for cross-implementation regression) ---------------

def _complex_to_pairs(arr: np.ndarray) -> list:
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _pairs_to_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    out = arr[..., 0] + 1j * arr[..., 1]
    out.setflags(write=False)
    return out


def save_channels(chans: ChannelSet, path) -> None:
    doc = {
        "seed": chans.seed,
        "g": _complex_to_pairs(chans.g),
        "q": _complex_to_pairs(chans.q),
        "c": _complex_to_pairs(chans.c),
        "h": _complex_to_pairs(chans.h),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_channels(path) -> ChannelSet:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return ChannelSet(
        g=_pairs_to_complex(doc["g"]),
        q=_pairs_to_complex(doc["q"]),
        c=_pairs_to_complex(doc["c"]),
        h=_pairs_to_complex(doc["h"]),
        seed=int(doc["seed"]),
    )
