"""Zero-forcing beamformers and receive filters, SINRs, spectral efficiency.

For an active set S, device i steers its sensing beam so that it keeps full
gain on its own echo while placing exact nulls on its interference channels
toward every other active device; the server inverts the stacked uplink
channel matrix so each device's data stream is recovered free of the others.
Both constructions fail with ``RankDeficient`` when the channel geometry is
numerically degenerate (Gram condition number above 1e12).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import ChannelSet
from .errors import DimensionError, DomainError, RankDeficient
from .scenario import ActivationVector, ScenarioConfig

_COND_CAP = 1e12


def _sorted_active(active: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(set(active)))


def _check_cond(gram: np.ndarray, what: str) -> None:
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > _COND_CAP:
        raise RankDeficient(f"{what}: Gram condition number {cond:.3e} exceeds {_COND_CAP:.0e}")


def zf_beamformer(chans: ChannelSet, active: Iterable[int], i: int) -> np.ndarray:
    """Unit-norm sensing beam for device i within active set S.

    Stacks i's echo channel and its interference channels toward every other
    active device into F (|S| x n_sense_ant) and returns the normalized
    minimum-norm solution of F f = e_1, i.e. the normalized first column of
    F^H (F F^H)^{-1}.
    """
    s = _sorted_active(active)
    if i not in s:
        raise DomainError(f"device {i} is not in the active set {s}")
    ns = chans.g.shape[1]
    if ns < len(s):
        raise DimensionError(
            f"n_sense_ant={ns} < |S|={len(s)}: cannot null all interference links")
    rows = [chans.g[i]] + [chans.q[i, k] for k in s if k != i]
    f_mat = np.conj(np.stack(rows))
    _check_cond(f_mat @ f_mat.conj().T, f"sensing beamformer for device {i}")
    e1 = np.zeros(len(s), dtype=complex)
    e1[0] = 1.0
    f, *_ = np.linalg.lstsq(f_mat, e1, rcond=None)
    norm = np.linalg.norm(f)
    if norm == 0.0:
        raise RankDeficient(f"sensing beamformer for device {i}: zero solution")
    return f / norm


def zf_receivers(chans: ChannelSet, active: Iterable[int]) -> np.ndarray:
    """Receive filter rows w_i^H (|S| x n_server_ant) with w_i^H h_j = delta_ij."""
    s = _sorted_active(active)
    ne = chans.h.shape[1]
    if ne < len(s):
        raise DimensionError(
            f"n_server_ant={ne} < |S|={len(s)}: uplink matrix cannot be inverted")
    h_mat = chans.h[list(s)].T  # (n_server_ant, |S|)
    _check_cond(h_mat.conj().T @ h_mat, "receive filters")
    return np.linalg.pinv(h_mat)


@dataclass(frozen=True)
class PhyState:
    """Beamformers, receive filters and effective gains for one active set.

    a[r] is the effective sensing gain |g_i^H f_i|^2 and gamma_c[r] the
    communication gain |w_i^H h_i|^2 / (||w_i||^2 sigma_c^2) of the r-th
    active device (1/W), indexed in sorted active-set order.
    """

    active: tuple[int, ...]
    f_zf: np.ndarray      # (|S|, n_sense_ant)
    w: np.ndarray         # (|S|, n_server_ant), rows are w_i^H
    a: np.ndarray         # (|S|,)
    gamma_c: np.ndarray   # (|S|,), 1/W

    def row(self, device: int) -> int:
        return self.active.index(device)


def compute_phy_state(cfg: ScenarioConfig, chans: ChannelSet,
                      active: Iterable[int]) -> PhyState:
    s = _sorted_active(active)
    f_zf = np.stack([zf_beamformer(chans, s, i) for i in s])
    w = zf_receivers(chans, s)
    a = np.abs(np.einsum("rn,rn->r", np.conj(chans.g[list(s)]), f_zf)) ** 2
    # Rows of w are already w_i^H, so the recovered gain is a plain product.
    wh = np.einsum("rn,rn->r", w, chans.h[list(s)])
    gamma_c = np.abs(wh) ** 2 / (np.linalg.norm(w, axis=1) ** 2 * cfg.noise_comm)
    for arr in (f_zf, w, a, gamma_c):
        arr.setflags(write=False)
    return PhyState(active=s, f_zf=f_zf, w=w, a=a, gamma_c=gamma_c)


class PhyCache:
    """Memoizes PhyState per active set (keyed by bitmask).

    The inner dict is only ever populated with values that are pure functions
    of the key, so a lost race between concurrent writers merely recomputes.
    """

    def __init__(self, cfg: ScenarioConfig, chans: ChannelSet):
        self.cfg = cfg
        self.chans = chans
        self._states: dict[int, PhyState] = {}

    def state(self, active: Iterable[int]) -> PhyState:
        s = _sorted_active(active)
        key = sum(1 << i for i in s)
        hit = self._states.get(key)
        if hit is None:
            hit = compute_phy_state(self.cfg, self.chans, s)
            self._states[key] = hit
        return hit


def sensing_sinr(cfg: ScenarioConfig, chans: ChannelSet, x: ActivationVector,
                 p, state: PhyState | None = None) -> np.ndarray:
    """Per-device linear sensing SINR; zeros for inactive devices.

    The own echo is beamformed (gain a_i); cross-device sensing interference
    is nulled by construction, so only the communication transmissions of the
    other active devices interfere.
    """
    active = x.active
    out = np.zeros(cfg.n_devices)
    if not active:
        return out
    if state is None:
        state = compute_phy_state(cfg, chans, active)
    for r, i in enumerate(state.active):
        interference = sum(p.p_c[j] * abs(chans.c[j, i]) ** 2
                           for j in active if j != i)
        out[i] = p.p_s[i] * state.a[r] / (cfg.noise_sense + interference)
    return out


def comm_sinr(cfg: ScenarioConfig, chans: ChannelSet, x: ActivationVector,
              p, state: PhyState | None = None) -> np.ndarray:
    """Per-device linear uplink SINR; zeros for inactive devices.

    Zero-forcing removes the other devices' data streams and the (known,
    deterministic) sensing waveforms are cancelled at the server, so the
    only impairment left is filtered noise: SINR_i = gamma_c[i] * p_c[i].
    """
    active = x.active
    out = np.zeros(cfg.n_devices)
    if not active:
        return out
    if state is None:
        state = compute_phy_state(cfg, chans, active)
    for r, i in enumerate(state.active):
        out[i] = p.p_c[i] * state.gamma_c[r]
    return out


def spectral_efficiency(sinr):
    """log2(1 + sinr) in bps/Hz; accepts scalars or arrays."""
    arr = np.asarray(sinr, dtype=float)
    if np.any(arr < 0):
        raise DomainError("spectral efficiency undefined for negative SINR")
    result = np.log2(1.0 + arr)
    return float(result) if np.isscalar(sinr) else result
