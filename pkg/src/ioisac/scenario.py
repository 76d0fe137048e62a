"""Scenario configuration: loading, validation, unit conversion, and target geometry.

A scenario is described by a flat TOML file whose keys carry explicit units
(``*_dbm``, ``*_mw``, ``*_db``, ``*_mb``, ``*_mhz``).  The loader converts
everything to linear SI units (watts, bits, Hz) once, so the rest of the
package never sees dB or milliwatt values.  See ``docs/config_format.md``
for the full key schema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace  # noqa: F401  (replace re-exported)
from typing import Iterable, Sequence

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import DomainError, ParseError, ValidationError

Point = tuple[float, float]


# --- unit conversions -------------------------------------------------------

def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise DomainError(f"cannot express non-positive value {x} in dB")
    return 10.0 * math.log10(x)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(w: float) -> float:
    return linear_to_db(w) + 30.0


def mw_to_watt(mw: float) -> float:
    return mw * 1e-3


def mb_to_bits(mb: float) -> float:
    """Megabytes to bits, SI convention: 1 MB = 1e6 bytes = 8e6 bits."""
    return mb * 8e6


# --- config -----------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    """Immutable description of one experiment, all fields in linear SI units.

    Safe for concurrent shared reads; derive variants with
    ``dataclasses.replace``.
    """

    device_positions: tuple[Point, ...]
    server_position: Point
    target_position: Point
    n_sense_ant: int
    n_server_ant: int
    noise_sense: float          # W
    noise_comm: float           # W
    p_max: float                # W, per device
    p_sum: float                # W, system budget
    beta: float                 # linear sensing-SINR threshold
    alpha: float                # aspect-angle cosine threshold
    p_f: float                  # nominal false-alarm probability
    p_m: float                  # nominal missed-detection probability
    lam: float                  # error-probability degradation factor, >= 1
    prior_h0: float
    prior_h1: float
    data_bits: float            # bits per sample
    bandwidth: float            # Hz per device
    n_flop: float               # FLOPs per sample
    compute_speed: float        # FLOPs/s at the server
    pathloss_ref_db: float      # loss at 1 m, dB
    pathloss_exponent: float
    rician_k_db: float
    seed: int

    @property
    def n_devices(self) -> int:
        return len(self.device_positions)

    def __post_init__(self) -> None:
        _validate(self)


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.n_devices < 1:
        raise ValidationError("device_positions: at least one device required")
    if cfg.n_sense_ant < 1:
        raise ValidationError("n_sense_ant: must be >= 1")
    if cfg.n_server_ant < 1:
        raise ValidationError("n_server_ant: must be >= 1")
    for name in ("noise_sense", "noise_comm", "p_max", "p_sum", "beta",
                 "data_bits", "bandwidth", "n_flop", "compute_speed"):
        if getattr(cfg, name) <= 0:
            raise ValidationError(f"{name}: must be strictly positive")
    if not 0.0 < cfg.alpha < 1.0:
        raise ValidationError("alpha: must lie in (0, 1)")
    if cfg.p_f < 0 or cfg.p_m < 0:
        raise ValidationError("p_f/p_m: must be non-negative")
    if cfg.lam < 1.0:
        raise ValidationError("lambda: degradation factor must be >= 1")
    if cfg.lam * max(cfg.p_f, cfg.p_m) > 1.0:
        raise ValidationError(
            "lambda: degraded probability lambda*max(p_f, p_m) exceeds 1")
    if not 0.0 <= cfg.prior_h0 <= 1.0 or not 0.0 <= cfg.prior_h1 <= 1.0:
        raise ValidationError("prior_h0/prior_h1: must lie in [0, 1]")
    if abs(cfg.prior_h0 + cfg.prior_h1 - 1.0) > 1e-12:
        raise ValidationError("prior_h0: priors must sum to 1 within 1e-12")
    if cfg.seed < 0:
        raise ValidationError("seed: must be a non-negative 64-bit integer")
    tx, ty = cfg.target_position
    for k, (x, y) in enumerate(cfg.device_positions):
        if math.hypot(x - tx, y - ty) <= 0.0:
            raise ValidationError(
                f"device_positions: device {k} is co-located with the target")


# Config-file key schema.  Values are given in the unit named by the key and
# converted once at load time.
_DEFAULT_RAW: dict = {
    "device_positions": [[0.0, 5.0], [10.0, 5.0], [10.0, 0.0], [-10.0, -5.0],
                         [0.0, -5.0], [-10.0, -5.0], [-10.0, 0.0], [-10.0, 5.0]],
    "server_position": [-2.5, 10.0],
    "target_position": [5.0, 0.0],
    "n_sense_ant": 16,
    "n_server_ant": 16,
    "noise_sense_dbm": -90.0,
    "noise_comm_dbm": -60.0,
    "p_max_mw": 30.0,
    "p_sum_mw": 90.0,
    "beta_db": 27.0,
    "alpha": 0.5,
    "p_f": 0.1,
    "p_m": 0.1,
    "lambda": 3.0,
    "prior_h0": 0.5,
    "prior_h1": 0.5,
    "data_mb": 0.125,
    "bandwidth_mhz": 50.0,
    "n_flop": 3.0e9,
    "compute_speed": 1.0e11,
    "pathloss_ref_db": 30.0,
    "pathloss_exponent": 1.6,   # indoor line-of-sight power law
    "rician_k_db": 10.0,
    "seed": 7,
}


def raw_default_config() -> dict:
    """The built-in eight-device conference-hall scenario, in file units."""
    return {k: (list(map(list, v)) if k == "device_positions" else
                list(v) if isinstance(v, list) else v)
            for k, v in _DEFAULT_RAW.items()}


def _as_point(value, key: str) -> Point:
    try:
        x, y = value
        return (float(x), float(y))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{key}: expected a 2-D coordinate pair") from exc


def config_from_raw(raw: dict) -> ScenarioConfig:
    """Build a validated config from a raw key/value mapping in file units.

    Unknown keys are rejected so that typos in files or ``--set`` overrides
    fail loudly instead of silently falling back to defaults.
    """
    unknown = sorted(set(raw) - set(_DEFAULT_RAW))
    if unknown:
        raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")
    merged = dict(_DEFAULT_RAW)
    merged.update(raw)
    try:
        positions = tuple(_as_point(p, "device_positions")
                          for p in merged["device_positions"])
        return ScenarioConfig(
            device_positions=positions,
            server_position=_as_point(merged["server_position"], "server_position"),
            target_position=_as_point(merged["target_position"], "target_position"),
            n_sense_ant=int(merged["n_sense_ant"]),
            n_server_ant=int(merged["n_server_ant"]),
            noise_sense=dbm_to_watt(float(merged["noise_sense_dbm"])),
            noise_comm=dbm_to_watt(float(merged["noise_comm_dbm"])),
            p_max=mw_to_watt(float(merged["p_max_mw"])),
            p_sum=mw_to_watt(float(merged["p_sum_mw"])),
            beta=db_to_linear(float(merged["beta_db"])),
            alpha=float(merged["alpha"]),
            p_f=float(merged["p_f"]),
            p_m=float(merged["p_m"]),
            lam=float(merged["lambda"]),
            prior_h0=float(merged["prior_h0"]),
            prior_h1=float(merged["prior_h1"]),
            data_bits=mb_to_bits(float(merged["data_mb"])),
            bandwidth=float(merged["bandwidth_mhz"]) * 1e6,
            n_flop=float(merged["n_flop"]),
            compute_speed=float(merged["compute_speed"]),
            pathloss_ref_db=float(merged["pathloss_ref_db"]),
            pathloss_exponent=float(merged["pathloss_exponent"]),
            rician_k_db=float(merged["rician_k_db"]),
            seed=int(merged["seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    """Load a TOML scenario file; keys absent from the file keep their defaults."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed config file {path}: {exc}") from exc
    return config_from_raw(raw)


def default_scenario() -> ScenarioConfig:
    """The eight-device conference-hall scenario used throughout the tests.

    Devices 1..8 sit at (0,5), (10,5), (10,0), (-10,-5), (0,-5), (-10,-5),
    (-10,0), (-10,5); the server is at (-2.5,10) and the target at (5,0).
    The coordinate (-10,-5) appears twice on purpose (devices 4 and 6 are
    co-located); override ``device_positions`` to change that.
    """
    return config_from_raw({})


# --- activation vectors -----------------------------------------------------

@dataclass(frozen=True)
class ActivationVector:
    """Binary on/off state per device; the active set is {i : bits[i] = 1}."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not all(b in (0, 1) for b in self.bits):
            raise ValidationError("ActivationVector entries must be 0 or 1")

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    @property
    def size(self) -> int:
        return sum(self.bits)

    @property
    def bitmask(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    @classmethod
    def from_active(cls, n: int, active: Iterable[int]) -> "ActivationVector":
        chosen = set(active)
        return cls(tuple(1 if i in chosen else 0 for i in range(n)))

    @classmethod
    def from_bitmask(cls, n: int, mask: int) -> "ActivationVector":
        return cls(tuple((mask >> i) & 1 for i in range(n)))

    @classmethod
    def ones(cls, n: int) -> "ActivationVector":
        return cls((1,) * n)

    @classmethod
    def single(cls, n: int, i: int) -> "ActivationVector":
        return cls.from_active(n, (i,))

    def flipped(self, indices: Sequence[int]) -> "ActivationVector":
        bits = list(self.bits)
        for i in indices:
            bits[i] ^= 1
        return ActivationVector(tuple(bits))


def vote_threshold(s_size: int) -> int:
    """Half-voting threshold, clamped to 1 so a singleton still votes."""
    return max(1, s_size // 2)


# --- target-centric geometry ------------------------------------------------

def pairwise_angle(cfg: ScenarioConfig, i: int, j: int) -> float:
    """Angle at the target between the directions to devices i and j, in [0, pi]."""
    n = cfg.n_devices
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"device index out of range: ({i}, {j}) with N={n}")
    if i == j:
        raise DomainError("pairwise_angle requires two distinct devices")
    tx, ty = cfg.target_position
    vi = (cfg.device_positions[i][0] - tx, cfg.device_positions[i][1] - ty)
    vj = (cfg.device_positions[j][0] - tx, cfg.device_positions[j][1] - ty)
    dot = vi[0] * vj[0] + vi[1] * vj[1]
    norm = math.hypot(*vi) * math.hypot(*vj)
    return math.acos(max(-1.0, min(1.0, dot / norm)))


def aspect_cos(cfg: ScenarioConfig, i: int, motion_dir: float) -> float:
    """|cos| of the angle between device i's line of sight and the motion direction.

    ``motion_dir`` is the target's heading in radians.  The absolute value
    makes the result invariant under motion_dir -> motion_dir + pi.
    """
    if not 0 <= i < cfg.n_devices:
        raise IndexError(f"device index out of range: {i}")
    tx, ty = cfg.target_position
    dx, dy = tx - cfg.device_positions[i][0], ty - cfg.device_positions[i][1]
    d = math.hypot(dx, dy)
    return abs((dx * math.cos(motion_dir) + dy * math.sin(motion_dir)) / d)
