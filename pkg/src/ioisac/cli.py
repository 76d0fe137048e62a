"""Command-line front end.

Subcommands: ``pareto`` (error-latency fronts), ``sweep`` (scheme comparisons
over a parameter grid), ``converge`` (local-search objective traces against
the enumeration optimum), ``validate`` (oracle cross-checks).  Every command
writes its data files plus a ``manifest.json`` into ``--out``; floats are
printed at 12 significant digits so repeated runs with the same seed are
byte-identical (the manifest's wall-clock duration is the one exception).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import bench, fusion, jpads, oracle, palloc
from .channel import gen_channels
from .errors import Infeasible, IoIsacError
from .scenario import (ActivationVector, ScenarioConfig, config_from_raw,
                       raw_default_config, replace, vote_threshold)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _parse_overrides(pairs) -> dict:
    raw = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise IoIsacError(f"--set expects key=value, got '{item}'")
        try:
            raw.update(tomllib.loads(f"{key.strip()} = {value.strip()}"))
        except tomllib.TOMLDecodeError as exc:
            raise IoIsacError(f"cannot parse override '{item}': {exc}") from exc
    return raw


def _resolve_config(args) -> ScenarioConfig:
    raw = raw_default_config()
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise IoIsacError(f"config file not found: {path}")
        with open(path, "rb") as fh:
            try:
                raw.update(tomllib.load(fh))
            except tomllib.TOMLDecodeError as exc:
                raise IoIsacError(f"malformed config file {path}: {exc}") from exc
    raw.update(_parse_overrides(args.set))
    return config_from_raw(raw)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out: Path, command: str, args, seeds, outputs,
                    started: float) -> None:
    doc = {
        "command": command,
        "config": args.config or "<built-in default>",
        "overrides": list(args.set or []),
        "seeds": seeds,
        "outputs": [p.name for p in outputs],
        "duration_s": round(time.perf_counter() - started, 3),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def _front_rows(front: jpads.ParetoFront):
    for point, origin in zip(front.points, front.provenance):
        yield (point.x.bitmask, point.error_lb_comp, point.latency_ub,
               point.t_star, origin)


def cmd_pareto(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_config(args)
    seed = cfg.seed if args.seed is None else args.seed
    chans = gen_channels(cfg, seed)
    ev = jpads.Evaluator(cfg, chans)
    rows = []
    if args.algo in ("optimal", "both"):
        rows.extend(_front_rows(jpads.optimal_jpads(cfg, chans, evaluator=ev)))
    if args.algo in ("fast", "both"):
        mu_grid = [float(m) for m in args.mu_grid.split(",")] if args.mu_grid \
            else np.linspace(0.0, 1.0, 11).tolist()
        front = jpads.error_latency_region(cfg, chans, mu_grid,
                                           max_iters=args.iters,
                                           flip_size=args.flip, seed=seed,
                                           evaluator=ev)
        rows.extend(_front_rows(front))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "pareto.csv"
    _write_csv(path, ("x_bitmask", "error_lb", "latency_ub_s", "t_star",
                      "provenance"), rows)
    _write_manifest(out, "pareto", args, [seed], [path], started)
    return 0


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_config(args)
    seed = cfg.seed if args.seed is None else args.seed
    chans = gen_channels(cfg, seed)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    values = [float(v) for v in args.values.split(",") if v.strip()]
    result = bench.sweep(cfg, chans, schemes, args.param, values,
                         trials=args.trials, seed=seed,
                         single_device=args.single_device,
                         sensing_dwell=args.dwell)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    result.to_csv(path, fmt=_fmt)
    result.to_json(out / "sweep.json")
    _write_manifest(out, "sweep", args, [seed], [path, out / "sweep.json"], started)
    return 0


def cmd_converge(args) -> int:
    started = time.perf_counter()
    if args.iters < 1:
        print("error: --iters must be >= 1", file=sys.stderr)
        return 2
    cfg = _resolve_config(args)
    base_seed = cfg.seed if args.seed is None else args.seed
    chans = gen_channels(cfg, base_seed)
    ev = jpads.Evaluator(cfg, chans)
    front = jpads.optimal_jpads(cfg, chans, evaluator=ev)
    floor = min(jpads.weighted_objective(p, args.mu) for p in front.points)
    rows = []
    for k in range(args.seeds):
        run_seed = base_seed + k
        trace, _ = jpads.fast_jpads(cfg, chans, args.mu, max_iters=args.iters,
                                    flip_size=args.flip, seed=run_seed,
                                    evaluator=ev)
        rows.extend((run_seed, it, val, floor) for it, val in enumerate(trace))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "trace.csv"
    _write_csv(path, ("seed", "iteration", "objective", "enum_min_objective"),
               rows)
    _write_manifest(out, "converge", args,
                    list(range(base_seed, base_seed + args.seeds)), [path],
                    started)
    return 0


# --- validate ----------------------------------------------------------------

def _enumerate_fusion(s_size, z, cfg, gamma) -> float:
    """2^|S| outcome enumeration, independent of the convolution path."""
    from itertools import product
    pf = [cfg.p_f] * z + [cfg.lam * cfg.p_f] * (s_size - z)
    pm = [cfg.p_m] * z + [cfg.lam * cfg.p_m] * (s_size - z)
    acc = 0.0
    for bits in product((0, 1), repeat=s_size):
        votes = sum(bits)
        prob_h0 = math.prod(pf[i] if b else 1.0 - pf[i] for i, b in enumerate(bits))
        prob_h1 = math.prod(1.0 - pm[i] if b else pm[i] for i, b in enumerate(bits))
        if votes < gamma:
            acc += cfg.prior_h0 * prob_h0
        else:
            acc += cfg.prior_h1 * prob_h1
    return acc


def _check_fusion_exact(cfg: ScenarioConfig, tol: float) -> dict:
    worst = 0.0
    cases = 0
    for lam in (1.0, 2.0, 3.0):
        for p_f in (0.05, 0.1, 0.2):
            for p_m in (0.05, 0.1, 0.2):
                probe = replace(cfg, p_f=p_f, p_m=p_m, lam=lam)
                for s in range(1, 6):
                    gamma = vote_threshold(s)
                    for z in range(s + 1):
                        got = fusion.fusion_accuracy_exact(s, z, probe, gamma)
                        want = _enumerate_fusion(s, z, probe, gamma)
                        worst = max(worst, abs(got - want))
                        cases += 1
    return {"name": "fusion_exact_vs_enumeration",
            "status": "passed" if worst <= tol else "failed",
            "details": {"cases": cases, "max_abs_err": worst, "tolerance": tol}}


def _feasible_pairs(cfg, chans, limit=None):
    n = cfg.n_devices
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            x = ActivationVector.from_active(n, (i, j))
            try:
                palloc.solve_p2(cfg, chans, x)
            except Infeasible:
                continue
            pairs.append(x)
            if limit and len(pairs) >= limit:
                return pairs
    return pairs


def _check_p2_grid(cfg, seed: int, instances: int, rel_tol: float) -> dict:
    worst = 0.0
    checked = 0
    for k in range(instances):
        chans = gen_channels(cfg, seed + k)
        for x in _feasible_pairs(cfg, chans, limit=1):
            t_solver = palloc.solve_p2(cfg, chans, x).t_star
            t_grid = oracle.grid_power_oracle(cfg, chans, x, 1000)
            worst = max(worst, abs(t_solver - t_grid) / t_solver)
            checked += 1
    return {"name": "p2_vs_grid_search",
            "status": "passed" if worst <= rel_tol and checked else "failed",
            "details": {"instances": checked, "max_rel_err": worst,
                        "tolerance": rel_tol}}


def _check_matching(seed: int, graphs: int) -> dict:
    rng = np.random.default_rng(seed)
    mismatches = 0
    rank_violations = 0
    rank_equal = 0
    for _ in range(graphs):
        n = int(rng.integers(2, 11))
        density = rng.uniform(0.1, 0.9)
        t = np.zeros((n, n), dtype=int)
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < density:
                    t[i, j], t[j, i] = 1, -1
                    edges.append((i, j))
        div = fusion.DiversityMatrix(devices=tuple(range(n)), t=t)
        nu = fusion.max_matching(div)
        if nu != oracle.brute_matching(edges, n):
            mismatches += 1
        half = fusion.rank_half(div)
        if half > nu:
            rank_violations += 1
        elif half == nu:
            rank_equal += 1
    return {"name": "matching_vs_brute_force",
            "status": "passed" if mismatches == 0 and rank_violations == 0
            else "failed",
            "details": {"graphs": graphs, "mismatches": mismatches,
                        "rank_bound_violations": rank_violations,
                        "rank_equality_rate": rank_equal / graphs}}


def _check_bound_vs_mc(cfg, chans, trials: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    ev = jpads.Evaluator(cfg, chans)
    violations = 0
    checked = 0
    margins = []
    attempts = 0
    while checked < 8 and attempts < 64:
        attempts += 1
        mask = int(rng.integers(1, 1 << cfg.n_devices))
        x = ActivationVector.from_bitmask(cfg.n_devices, mask)
        try:
            point = ev.point(x)
        except Infeasible:
            continue
        est = oracle.monte_carlo_accuracy(cfg, chans, x, point.allocation,
                                          trials, seed + checked)
        margin = est.mean - (point.accuracy_lb - 3.0 * est.stderr)
        margins.append(margin)
        if margin < 0:
            violations += 1
        checked += 1
    return {"name": "accuracy_bound_vs_monte_carlo",
            "status": "passed" if violations == 0 and checked else "failed",
            "details": {"cases": checked, "violations": violations,
                        "min_margin": min(margins) if margins else math.nan,
                        "trials": trials}}


def _report_closed_form(cfg) -> dict:
    worst = 0.0
    for s in range(1, 5):
        gamma = vote_threshold(s)
        for z in range(s + 1):
            exact = fusion.fusion_accuracy_exact(s, z, cfg, gamma)
            printed = fusion.fusion_accuracy_closed_form(s, z, cfg, gamma)
            worst = max(worst, abs(printed - exact))
    return {"name": "closed_form_discrepancy",
            "status": "reported",
            "details": {"max_abs_discrepancy_vs_exact": worst,
                        "note": "published closed form is inconsistent; "
                                "reported, never failed"}}


def cmd_validate(args) -> int:
    started = time.perf_counter()
    cfg = _resolve_config(args)
    seed = cfg.seed if args.seed is None else args.seed
    chans = gen_channels(cfg, seed)
    fusion_tol = -1.0 if args.inject_failure else 1e-12
    checks = [
        _check_fusion_exact(cfg, fusion_tol),
        _check_p2_grid(cfg, seed, instances=5, rel_tol=0.005),
        _check_matching(seed, graphs=200),
        _check_bound_vs_mc(cfg, chans, trials=args.trials, seed=seed),
        _report_closed_form(cfg),
    ]
    passed = all(c["status"] != "failed" for c in checks)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "validate.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"passed": passed,
                   "checks": [{**c, "details": {
                       k: (float(_fmt(v)) if isinstance(v, float) else v)
                       for k, v in c["details"].items()}} for c in checks]},
                  fh, indent=1)
    _write_manifest(out, "validate", args, [seed], [path], started)
    for c in checks:
        print(f"{c['name']}: {c['status'].upper()}")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ioisac",
        description="ISAC edge-inference simulator and scheduling optimizers")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML scenario file (default: built-in)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
        p.add_argument("--seed", type=int, default=None,
                       help="channel/algorithm seed (default: config seed)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("pareto", help="error-latency fronts")
    common(p)
    p.add_argument("--algo", choices=("optimal", "fast", "both"), default="both")
    p.add_argument("--mu-grid", help="comma-separated weights for the fast front")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--flip", type=int, default=1)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("sweep", help="scheme comparison over a parameter grid")
    common(p)
    p.add_argument("--param", required=True,
                   choices=("psum", "pmax", "lambda", "beta"))
    p.add_argument("--values", required=True,
                   help="comma-separated values in config units (mW/dB)")
    p.add_argument("--schemes", default="io-isac,single,all,sequential")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--single-device", type=int, default=bench.DEFAULT_SINGLE_DEVICE)
    p.add_argument("--dwell", type=float, default=bench.DEFAULT_SENSING_DWELL)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("converge", help="local-search objective traces")
    common(p)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--flip", type=int, default=1)
    p.add_argument("--seeds", type=int, default=20, help="number of runs")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("validate", help="run the oracle cross-check report")
    common(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--inject-failure", action="store_true",
                   help=argparse.SUPPRESS)  # test hook: corrupt one tolerance
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IoIsacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
