"""Command line entry point: `hyperheat run` and `hyperheat list-experiments`."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .bench import (ExperimentConfig, datum_from_json, packaged_experiments, resolve_config, run_many,
                    solver_config_from_json)
from .datum import GridFunction
from .entropy import REFERENCES, entropy_decay_series
from .geometry import PolarPoint
from .kernel import log_kernel, normalization
from .profiles import log_phi, memory_Phi, phi_ratio_limit_check
from .solvers import solve_general, solve_horospheric, solve_radial
from .sphere import sphere_grid

log = logging.getLogger("hyperheat")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperheat", description="Heat flow on hyperbolic space: rate experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one or more experiment configs")
    run.add_argument("--config", action="append", required=True,
                     help="config path or packaged experiment name; repeatable; 'all' runs every packaged one")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="output root (default: output_dir of the first config)")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list-experiments", help="list packaged experiment configs")

    kern = sub.add_parser("kernel", help="heat kernel values").add_subparsers(dest="action", required=True)
    ev = kern.add_parser("eval")
    ev.add_argument("--d", type=int, required=True)
    ev.add_argument("--t", type=float, required=True)
    ev.add_argument("--r", type=float, required=True)
    ev.add_argument("--log", action="store_true", help="print ln G instead of G")
    cn = kern.add_parser("check-normalization")
    cn.add_argument("--d", type=int, required=True)
    cn.add_argument("--t", type=float, required=True)

    ph = sub.add_parser("phi", help="limiting kernel ratio phi")
    ph.add_argument("--d", type=int, required=True)
    ph.add_argument("--ry", type=float, required=True)
    ph.add_argument("--cos-angle", type=float, required=True)
    pl = sub.add_parser("phi-limit", help="kernel ratio along r = (d-1)t against phi")
    pl.add_argument("--d", type=int, required=True)
    pl.add_argument("--ry", type=float, required=True)
    pl.add_argument("--cos-angle", type=float, required=True)
    pl.add_argument("--t-max", type=float, required=True)
    pl.add_argument("--n", type=int, default=8)
    mp = sub.add_parser("memory-phi", help="memory function on a sphere grid")
    mp.add_argument("--config", required=True)
    mp.add_argument("--out", required=True)

    so = sub.add_parser("solve", help="numerical solutions")
    so.add_argument("kind", choices=("radial", "horo", "general"))
    so.add_argument("--config", required=True)
    so.add_argument("--checkpoints", help="comma separated times (radial, horo)")
    so.add_argument("--t", type=float, help="time (general)")
    so.add_argument("--out", required=True)

    en = sub.add_parser("entropy", help="entropy series of solver snapshots")
    en.add_argument("--snapshots", required=True, help="directory written by `hyperheat solve radial|horo`")
    en.add_argument("--ref", choices=("radial", "horo", "directional"), required=True)
    en.add_argument("--out", required=True)
    return p


def _g17(x) -> str:
    return format(float(x), ".17g")


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _theta(d: int, c: float) -> np.ndarray:
    theta = np.zeros(d)
    theta[0] = c
    theta[1] = math.sqrt(max(0.0, 1.0 - c * c))
    return theta


def _cmd_kernel(args) -> int:
    if args.action == "eval":
        lg = log_kernel(args.d, args.t, args.r)
        print(_g17(lg if args.log else math.exp(lg)))
    else:
        print(_g17(normalization(args.d, args.t)))
    return 0


def _cmd_phi(args) -> int:
    if not -1.0 <= args.cos_angle <= 1.0:
        raise ValueError("--cos-angle must lie in [-1, 1]")
    print(_g17(math.exp(float(log_phi(args.d, args.ry, args.cos_angle)))))
    return 0


def _cmd_phi_limit(args) -> int:
    y = PolarPoint(args.ry, np.eye(args.d)[0])
    ts = np.geomspace(1.0, args.t_max, args.n)
    ratios = phi_ratio_limit_check(args.d, y, _theta(args.d, args.cos_angle), 0.0, ts)
    target = math.exp(float(log_phi(args.d, args.ry, args.cos_angle)))
    print("t,ratio,phi,rel_error")
    for t, q in zip(ts, ratios):
        print(f"{_g17(t)},{_g17(q)},{_g17(target)},{_g17(abs(q / target - 1.0))}")
    return 0


def _cmd_memory_phi(args) -> int:
    raw = _load_json(args.config)
    d = int(raw["d"])
    u0 = datum_from_json(raw["u0"], d, Path(args.config).parent)
    grid = sphere_grid(d, int(raw.get("n_theta", 64 if d == 2 else 16)))
    vals = memory_Phi(d, u0, grid).values
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta_index"] + [f"theta_{k}" for k in range(d)] + ["phi_value"])
        for i, (node, v) in enumerate(zip(grid.nodes, vals)):
            w.writerow([i] + [_g17(x) for x in node] + [_g17(v)])
    return 0


def _cmd_solve(args) -> int:
    raw = _load_json(args.config)
    d = int(raw["d"])
    u0 = datum_from_json(raw["u0"], d, Path(args.config).parent)
    cfg = solver_config_from_json(raw.get("solver"))
    if args.kind == "general":
        if args.t is None:
            raise ValueError("solve general needs --t")
        r = np.asarray(raw.get("r_nodes", np.linspace(0.0, (d - 1) * args.t + 8.0 * math.sqrt(args.t + 1.0), 81)))
        grid = sphere_grid(d, int(raw.get("n_theta", 32 if d == 2 else 8)))
        u = solve_general(d, u0, args.t, (r, grid.nodes))
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r"] + [f"theta_{k}" for k in range(d)] + ["u"])
            for i, rv in enumerate(r):
                for j, node in enumerate(grid.nodes):
                    w.writerow([_g17(rv)] + [_g17(x) for x in node] + [_g17(u[i, j])])
        return 0
    if not args.checkpoints:
        raise ValueError("solve radial|horo needs --checkpoints")
    ts = sorted(float(x) for x in args.checkpoints.split(","))
    run = solve_radial if args.kind == "radial" else solve_horospheric
    snaps = run(d, u0, ts[-1], cfg, ts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"d": d, "kind": snaps[0].kind, "snapshots": []}
    for k, g in enumerate(snaps):
        name = f"snapshot_{k:03d}.csv"
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "u", "weight"])
            for row in zip(g.nodes, g.values, g.weights):
                w.writerow([_g17(x) for x in row])
        meta["snapshots"].append({"t": g.t, "file": name})
    with open(out / "snapshots.json", "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return 0


def read_snapshots(directory) -> list[GridFunction]:
    directory = Path(directory)
    meta = _load_json(directory / "snapshots.json")
    out = []
    for s in meta["snapshots"]:
        data = np.loadtxt(directory / s["file"], delimiter=",", skiprows=1, ndmin=2)
        with np.errstate(divide="ignore"):
            lw = np.log(data[:, 2])
        out.append(GridFunction(meta["kind"], int(meta["d"]), data[:, 0], data[:, 1], float(s["t"]), lw))
    return out


def _cmd_entropy(args) -> int:
    snaps = [g for g in read_snapshots(args.snapshots) if g.t > 0]
    if not snaps:
        raise ValueError("no snapshots with t > 0")
    builder = REFERENCES[args.ref](snaps[0].d)
    series = entropy_decay_series(snaps, builder)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "tau", "H", "D", "l1_gap", "ck_lhs", "ck_rhs"])
        for r in series:
            w.writerow([_g17(x) for x in (r.t, r.tau, r.H, r.D, r.l1_gap, r.ck_lhs, r.ck_rhs)])
    print(f"fitted rate of H in tau: {series.rate:.4f} +- {series.rate_stderr:.4f}")
    return 0


_COMMANDS = {"kernel": _cmd_kernel, "phi": _cmd_phi, "phi-limit": _cmd_phi_limit, "memory-phi": _cmd_memory_phi,
             "solve": _cmd_solve, "entropy": _cmd_entropy}


def _configs(names) -> list[ExperimentConfig]:
    out = []
    for n in names:
        if n == "all":
            out.extend(resolve_config(k) for k in packaged_experiments())
        else:
            out.append(resolve_config(n))
    seen = set()
    for c in out:
        if c.name in seen:
            raise ValueError(f"duplicate experiment name {c.name!r}")
        seen.add(c.name)
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-experiments":
        for name, path in packaged_experiments().items():
            with open(path) as fh:
                raw = json.load(fh)
            print(f"{name:28s} {raw['theorem']:18s} d={raw['d']}")
        return 0
    if args.command in _COMMANDS:
        try:
            return _COMMANDS[args.command](args)
        except (ValueError, FileNotFoundError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        configs = _configs(args.config)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = args.out or configs[0].output_dir
    summary = run_many(configs, out, jobs=args.jobs, seed=args.seed)
    for e in summary["experiments"]:
        status = "PASS" if e["passed"] else "FAIL"
        print(f"{status} {e['name']:28s} slope {e['fit_slope']:+.4f} (reference {e['reference_slope']:+.4f})")
    print(f"summary: {out}/summary.json")
    return 0 if summary["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
