"""Experiment runner: configs, rate fits and CSV/JSON/SVG outputs.

Each theorem kind maps to a function producing a time series of norms plus
an acceptance verdict.  Acceptance windows are stored in the config next to
the theoretical reference slope, never hidden in code.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .datum import Atom, GridFunction, HoroBump, InitialDatum
from .entropy import entropy_decay_series, horo_reference, radial_reference
from .geometry import PolarPoint, check_dimension, lambda1, m_d, sphere_area
from .kernel import log_kernel
from .profiles import (
    directional_mass,
    gaussian,
    memory_Phi,
    phi_ratio_limit_check,
    radial_C_bounds,
    radial_C_excess,
    radial_C_inf,
    radial_equilibrium_C,
)
from .solvers import SolverConfig, SuperpositionEvaluator, solve_horospheric, solve_radial
from .sphere import sphere_grid

THEOREMS = ("radial_L1", "radial_Linf", "horo_L1", "horo_Linf", "general_L1", "phi_limit",
            "C_bounds", "entropy_decay", "directional_mass")
MODELS = ("power_law", "exp_times_power")
SQRT_4PI = math.sqrt(4.0 * math.pi)


# -- configuration --------------------------------------------------------------------

def datum_from_json(spec: dict, d: int, base: Path | None = None) -> InitialDatum:
    kind = spec["kind"]
    if kind == "radial_bump":
        return InitialDatum.radial_bump(d, float(spec.get("mass", 1.0)), float(spec.get("width", 1.0)))
    if kind == "atoms":
        atoms = []
        for a in spec["atoms"]:
            theta = np.asarray(a["theta"], dtype=float)
            atoms.append(Atom(PolarPoint(float(a["r"]), theta / np.linalg.norm(theta)), float(a["mass"]),
                              float(a["width"])))
        return InitialDatum.atom_mixture(atoms, d)
    if kind == "horo_bumps":
        return InitialDatum.horo_bumps(d, [HoroBump(float(b["center"]), float(b["mass"]), float(b["width"]))
                                           for b in spec["bumps"]])
    if kind in ("radial_table", "horo_table"):
        path = Path(spec["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        g = GridFunction("radial" if kind == "radial_table" else "horospheric", d, data[:, 0], data[:, 1])
        return InitialDatum.radial_table(g) if kind == "radial_table" else InitialDatum.horo_table(g)
    raise ValueError(f"unknown u0 kind {kind!r}")


def solver_config_from_json(spec: dict | None) -> SolverConfig:
    s = dict(spec or {})
    if "W" in s:
        s["domain_width_W"] = s.pop("W")
    unknown = set(s) - {f.name for f in fields(SolverConfig)}
    if unknown:
        raise ValueError(f"unknown solver keys: {sorted(unknown)}")
    return SolverConfig(**s)


def _time_grid(spec) -> list[float]:
    if isinstance(spec, dict):
        if "geomspace" in spec:
            a, b, n = spec["geomspace"]
            return [float(x) for x in np.geomspace(a, b, int(n))]
        if "linspace" in spec:
            a, b, n = spec["linspace"]
            return [float(x) for x in np.linspace(a, b, int(n))]
        raise ValueError("time_grid dict needs geomspace or linspace")
    return [float(x) for x in spec]


@dataclass
class ExperimentConfig:
    name: str
    theorem: str
    d: int
    u0: dict | None
    time_grid: list
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_dir: str = "out"
    model: str = "power_law"
    reference_slope: float = -0.5
    fit_window: tuple | None = None
    accept: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0
    base_dir: str | None = None

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"theorem must be one of {THEOREMS}")
        check_dimension(self.d)
        self.time_grid = _time_grid(self.time_grid)
        if any(b <= a for a, b in zip(self.time_grid, self.time_grid[1:])) or self.time_grid[0] <= 0:
            raise ValueError("time_grid must be positive and increasing")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.u0 is not None:
            kind = self.datum().kind
            want = {"radial_L1": "radial", "radial_Linf": "radial", "horo_L1": "horospheric",
                    "horo_Linf": "horospheric", "general_L1": "radial", "directional_mass": "radial"}
            if self.theorem in want and kind != want[self.theorem]:
                raise ValueError(f"{self.theorem} needs {want[self.theorem]} data")

    def _base(self):
        return Path(self.base_dir) if self.base_dir else None

    def datum(self) -> InitialDatum:
        if self.u0 is None:
            raise ValueError(f"experiment {self.name} has no initial datum")
        return datum_from_json(self.u0, self.d, self._base())

    @classmethod
    def from_dict(cls, raw: dict, base_dir=None) -> "ExperimentConfig":
        raw = dict(raw)
        fit = raw.pop("fit", {}) or {}
        return cls(name=raw["name"], theorem=raw["theorem"], d=int(raw["d"]), u0=raw.get("u0"),
                   time_grid=raw["time_grid"], solver=solver_config_from_json(raw.pop("solver", None)),
                   output_dir=raw.get("output_dir", "out"), model=fit.get("model", "power_law"),
                   reference_slope=float(fit.get("reference_slope", -0.5)),
                   fit_window=tuple(fit["window"]) if fit.get("window") else None,
                   accept=raw.get("accept", {}), params=raw.get("params", {}), seed=int(raw.get("seed", 0)),
                   base_dir=str(base_dir) if base_dir else None)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        with open(path) as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)


def packaged_experiments() -> dict[str, Path]:
    root = resources.files("hyperheat") / "experiments"
    return {Path(p.name).stem: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".json")}


def resolve_config(name_or_path) -> ExperimentConfig:
    p = Path(name_or_path)
    if p.exists():
        return ExperimentConfig.load(p)
    known = packaged_experiments()
    stem = p.stem
    if stem in known:
        return ExperimentConfig.load(known[stem])
    raise FileNotFoundError(f"no config {name_or_path!r} (packaged: {', '.join(known)})")


# -- fitting --------------------------------------------------------------------------

@dataclass
class RateReport:
    times: list
    norms: list
    fit_slope: float
    fit_stderr: float
    fit_window: tuple
    reference_slope: float
    model: str = "power_law"
    fit_intercept: float = 0.0
    name: str = "report"
    theorem: str = ""
    passed: bool | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.norms) or len(self.times) < 4:
            raise ValueError("a rate report needs at least 4 (t, norm) pairs")
        lo, hi = self.fit_window
        if lo < min(self.times) - 1e-12 or hi > max(self.times) + 1e-12:
            raise ValueError("fit window must lie inside the sampled times")

    def fitted(self, t):
        t = np.asarray(t, dtype=float)
        if self.model == "power_law":
            return np.exp(self.fit_intercept + self.fit_slope * np.log(t))
        return np.exp(self.fit_intercept + self.fit_slope * t - 2.0 * np.log(t))

    def reference_curve(self):
        """Theoretical law through the first point of the fit window."""
        t = np.asarray(self.times, dtype=float)
        n = np.asarray(self.norms, dtype=float)
        k = int(np.argmin(np.abs(t - self.fit_window[0])))
        if self.model == "power_law":
            return n[k] * (t / t[k]) ** self.reference_slope
        return n[k] * np.exp(self.reference_slope * (t - t[k])) * (t[k] / t) ** 2


def fit_rate(times, norms, model: str = "power_law", window=None, reference_slope: float | None = None,
             **kw) -> RateReport:
    """Least squares of ln(norm) on ln t (power_law) or of ln(norm) + 2 ln t on t (exp_times_power)."""
    t = np.asarray(times, dtype=float)
    n = np.asarray(norms, dtype=float)
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if len(t) != len(n) or len(t) < 4:
        raise ValueError("need at least 4 (t, norm) pairs")
    if np.any(~np.isfinite(n)) or np.any(n <= 0):
        raise ValueError("norms must be positive and finite")
    lo, hi = (float(t.min()), float(t.max())) if window is None else (float(window[0]), float(window[1]))
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if np.count_nonzero(sel) < 2:
        raise ValueError("fit window holds fewer than two points")
    if model == "power_law":
        x, y = np.log(t[sel]), np.log(n[sel])
    else:
        x, y = t[sel], np.log(n[sel]) + 2.0 * np.log(t[sel])
    if np.ptp(x) == 0:
        raise ValueError("degenerate regression: all abscissae equal")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = len(x) - 2
    if dof > 0:
        s2 = float(np.sum((y - A @ coef) ** 2)) / dof
        se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    else:
        se = 0.0
    ref = (-0.5 if model == "power_law" else -1.0) if reference_slope is None else reference_slope
    return RateReport([float(v) for v in t], [float(v) for v in n], float(coef[0]), se,
                      (float(t[sel].min()), float(t[sel].max())), float(ref), model, float(coef[1]), **kw)


# -- experiments ----------------------------------------------------------------------

def _checkpoints(cfg):
    ts = cfg.time_grid
    return ts[-1], ts


def _exp_radial_L1(cfg: ExperimentConfig):
    u0 = cfg.datum()
    t_end, ts = _checkpoints(cfg)
    snaps = solve_radial(cfg.d, u0, t_end, cfg.solver, ts)
    d = cfg.d
    MR = snaps[0].mass()
    C_inf = radial_C_inf(d, MR)
    norms = []
    for g in snaps:
        T = g.t + 1.0
        prof = C_inf * gaussian(T, g.nodes + (d - 1) * T)
        norms.append(float(np.sum(g.weights * np.abs(g.values - prof))))
    return ts, norms, {"radial_mass": MR, "C_inf": C_inf}


def _log_sup_diff(u, log_ref):
    """ln max|u - e^{log_ref}| evaluated as ln e^{log_ref} + ln|u e^{-log_ref} - 1| where possible."""
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        ref = np.exp(log_ref)
        rel = np.where(np.isfinite(log_ref), u * np.exp(-log_ref) - 1.0, np.inf)
        terms = np.where(np.abs(rel) < np.inf, log_ref + np.log(np.abs(rel)), np.log(np.abs(u - ref)))
    return float(np.max(terms))


def _exp_radial_Linf(cfg: ExperimentConfig):
    u0 = cfg.datum()
    t_end, ts = _checkpoints(cfg)
    snaps = solve_radial(cfg.d, u0, t_end, cfg.solver, ts)
    d = cfg.d
    M = snaps[0].full_mass()
    lam = lambda1(d)
    logs = [_log_sup_diff(g.values, math.log(M) + log_kernel(d, g.t, g.nodes)) for g in snaps]
    Q = [lv + lam * t + 2.0 * math.log(t) for lv, t in zip(logs, ts)]
    return ts, [math.exp(v) for v in logs], {"full_mass": M, "log_norms": logs, "Q": Q}


def _exp_horo(cfg: ExperimentConfig, shift: float):
    u0 = cfg.datum()
    t_end, ts = _checkpoints(cfg)
    snaps = solve_horospheric(cfg.d, u0, t_end, cfg.solver, ts)
    d = cfg.d
    MH = snaps[0].mass()
    norms = []
    for g in snaps:
        T = g.t + shift
        prof = MH * gaussian(T, g.nodes + (d - 1) * T) / SQRT_4PI
        diff = np.abs(g.values - prof)
        norms.append(float(np.max(diff)) if shift else float(np.sum(g.weights * diff)))
    return ts, norms, {"horo_mass": MH}


def _exp_horo_L1(cfg):
    return _exp_horo(cfg, 0.0)


def _exp_horo_Linf(cfg):
    return _exp_horo(cfg, 1.0)


def _polar_l1(d, u, r_nodes, r_weights, grid, profile):
    """int |u - profile| sinh^{d-1} dr dtheta on the product of a radial rule and a sphere grid."""
    dens = np.sinh(r_nodes) ** (d - 1)
    return float(((r_weights * dens) @ np.abs(u - profile)) @ grid.weights)


def _exp_general_L1(cfg: ExperimentConfig):
    from .profiles import radial_gl_nodes

    d = cfg.d
    u0 = cfg.datum()
    grid = sphere_grid(d, int(cfg.params.get("n_theta", 64 if d == 2 else 16)))
    Phi = memory_Phi(d, u0, grid).values
    S = sphere_area(d)
    C_inf = radial_C_inf(d, 1.0)
    norms = []
    for t in cfg.time_grid:
        ev = SuperpositionEvaluator(d, u0, t)
        r_hi = (d - 1) * t + 12.0 * math.sqrt(t + 1.0) + 10.0
        r, wr = radial_gl_nodes(r_hi, panel=float(cfg.params.get("panel", 1.0)))
        u = ev(r, grid.nodes)
        T = t + 1.0
        prof = (C_inf / S) * gaussian(T, r + (d - 1) * T)[:, None] * Phi[None, :]
        norms.append(_polar_l1(d, u, r, wr, grid, prof))
    return cfg.time_grid, norms, {"Phi_mean": float(np.mean(Phi))}


def _exp_phi_limit(cfg: ExperimentConfig):
    d = cfg.d
    p = cfg.params
    y = PolarPoint(float(p.get("r_y", 1.0)), np.eye(d)[0])
    c = float(p.get("cos_angle", 1.0))
    theta = np.zeros(d)
    theta[0] = c
    theta[1] = math.sqrt(max(0.0, 1.0 - c * c))
    ell = float(p.get("ell", 0.0))
    ratios = phi_ratio_limit_check(d, y, theta, ell, cfg.time_grid)
    target = (math.cosh(y.r) - math.sinh(y.r) * c) ** (-(d - 1))
    errs = [abs(q / target - 1.0) for q in ratios]
    return cfg.time_grid, errs, {"ratios": ratios, "phi": target}


def _exp_C_bounds(cfg: ExperimentConfig):
    d = cfg.d
    mass = float(cfg.params.get("mass", 1.0))
    inside = []
    excess = []
    for t in cfg.time_grid:
        T = t + 1.0
        C = radial_equilibrium_C(d, mass, T)
        lo, hi = radial_C_bounds(d, mass, T)
        inside.append(bool(lo <= C <= hi))
        excess.append(radial_C_excess(d, mass, T))
    return cfg.time_grid, excess, {"within_bounds": inside, "m_d": m_d(d)}


def _exp_entropy_decay(cfg: ExperimentConfig):
    u0 = cfg.datum()
    t_end, ts = _checkpoints(cfg)
    if u0.kind == "radial":
        snaps = solve_radial(cfg.d, u0, t_end, cfg.solver, ts)
        ser = entropy_decay_series(snaps, radial_reference(cfg.d))
    else:
        snaps = solve_horospheric(cfg.d, u0, t_end, cfg.solver, ts)
        ser = entropy_decay_series(snaps, horo_reference())
    # H against e^tau = t + 1 on log axes: the slope is the rate in tau
    return [t + 1.0 for t in ts], [r.H for r in ser], {"D": [r.D for r in ser], "kind": u0.kind}


def _exp_directional_mass(cfg: ExperimentConfig):
    d = cfg.d
    u0 = cfg.datum()
    grid = sphere_grid(d, int(cfg.params.get("n_theta", 64 if d == 2 else 16)))
    Phi = memory_Phi(d, u0, grid).values
    S = sphere_area(d)
    gaps = []
    for t in cfg.time_grid:
        ev = SuperpositionEvaluator(d, u0, t)
        N = directional_mass(d, ev, t, grid).values
        gaps.append(float(np.max(np.abs(S * N - Phi)) / np.max(Phi)))
    return cfg.time_grid, gaps, {"Phi_max": float(np.max(Phi))}


EXPERIMENTS = {
    "radial_L1": _exp_radial_L1,
    "radial_Linf": _exp_radial_Linf,
    "horo_L1": _exp_horo_L1,
    "horo_Linf": _exp_horo_Linf,
    "general_L1": _exp_general_L1,
    "phi_limit": _exp_phi_limit,
    "C_bounds": _exp_C_bounds,
    "entropy_decay": _exp_entropy_decay,
    "directional_mass": _exp_directional_mass,
}


def _verdict(cfg: ExperimentConfig, rep: RateReport, extra: dict) -> tuple[bool, dict]:
    """Evaluate every acceptance rule present in cfg.accept."""
    acc = cfg.accept
    checks = {}
    if "slope" in acc:
        lo, hi = acc["slope"]
        checks["slope"] = lo <= rep.fit_slope <= hi
    if "slope_at_most" in acc:
        checks["slope_at_most"] = rep.fit_slope <= acc["slope_at_most"]
    if "final_below" in acc:
        checks["final_below"] = rep.norms[-1] < acc["final_below"]
    if "all_below" in acc:
        checks["all_below"] = max(rep.norms) < acc["all_below"]
    if "Q_nonincreasing_after" in acc:
        t0 = acc["Q_nonincreasing_after"]
        q = [v for t, v in zip(rep.times, extra["Q"]) if t >= t0]
        checks["Q_nonincreasing"] = all(b <= a + 1e-9 for a, b in zip(q, q[1:]))
    if acc.get("within_bounds"):
        checks["within_bounds"] = all(extra["within_bounds"])
    if "rate_vs_m_d" in acc:
        checks["rate_vs_m_d"] = rep.fit_slope <= -extra["m_d"] + acc["rate_vs_m_d"]
    return all(checks.values()) if checks else True, checks


def run_experiment(cfg: ExperimentConfig, seed: int | None = None) -> RateReport:
    """Run one experiment and return its RateReport (files are written by emit_outputs)."""
    np.random.seed(cfg.seed if seed is None else seed)
    try:
        times, norms, extra = EXPERIMENTS[cfg.theorem](cfg)
    except Exception as exc:  # keep the experiment context on the way out
        raise RuntimeError(f"experiment {cfg.name} ({cfg.theorem}, d={cfg.d}) failed: {exc}") from exc
    window = cfg.fit_window
    if window is None:
        t_lo = float(cfg.params.get("t_lo", 5.0))
        window = (max(t_lo, times[0]), times[-1])
    rep = fit_rate(times, norms, cfg.model, window, cfg.reference_slope, name=cfg.name, theorem=cfg.theorem)
    rep.details = {k: v for k, v in extra.items()}
    rep.passed, checks = _verdict(cfg, rep, extra)
    rep.details["checks"] = checks
    return rep


# -- outputs --------------------------------------------------------------------------

def _g17(x) -> str:
    return format(float(x), ".17g")


def emit_outputs(report: RateReport, directory) -> list[Path]:
    if report is None or not report.times:
        raise ValueError("refusing to write an empty report")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    name = report.name
    ref = report.reference_curve()
    csv_path = out / f"{name}_norms.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm", "reference_curve"])
        for t, n, r in zip(report.times, report.norms, ref):
            w.writerow([_g17(t), _g17(n), _g17(r)])
    json_path = out / f"{name}_rate.json"
    payload = {
        "name": name, "theorem": report.theorem, "model": report.model,
        "fit_slope": report.fit_slope, "fit_stderr": report.fit_stderr, "fit_intercept": report.fit_intercept,
        "fit_window": list(report.fit_window), "reference_slope": report.reference_slope,
        "passed": report.passed, "details": _jsonable(report.details),
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    svg_path = out / f"{name}.svg"
    svg_path.write_text(render_svg(report))
    return [csv_path, json_path, svg_path]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def render_svg(report: RateReport, width: int = 480, height: int = 360) -> str:
    """Log-log plot (log-linear for exp_times_power) with one data polyline and one fit line."""
    t = np.asarray(report.times, dtype=float)
    n = np.asarray(report.norms, dtype=float)
    xs = np.log10(t) if report.model == "power_law" else t
    ys = np.log10(n)
    lo, hi = report.fit_window
    fx = np.array([lo, hi])
    fy = np.log10(report.fitted(fx))
    fxs = np.log10(fx) if report.model == "power_law" else fx
    x0, x1 = float(min(xs.min(), fxs.min())), float(max(xs.max(), fxs.max()))
    y0, y1 = float(min(ys.min(), fy.min())), float(max(ys.max(), fy.max()))
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    pad = 40

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, ys))
    xlabel = "log10 t" if report.model == "power_law" else "t"
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'  <title>{report.name}: slope {report.fit_slope:.4f} (reference {report.reference_slope:g})</title>\n'
        f'  <rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
        f'  <rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        f'fill="none" stroke="#888"/>\n'
        f'  <polyline class="data" fill="none" stroke="#1f77b4" stroke-width="1.5" points="{pts}"/>\n'
        f'  <line class="fit" x1="{px(fxs[0]):.2f}" y1="{py(fy[0]):.2f}" x2="{px(fxs[1]):.2f}" '
        f'y2="{py(fy[1]):.2f}" stroke="#d62728" stroke-dasharray="6 3"/>\n'
        f'  <text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'  <text x="12" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 12 {height / 2:.0f})" '
        f'text-anchor="middle">log10 norm</text>\n'
        f'</svg>\n'
    )


def _run_one(args):
    cfg, seed, out_dir = args
    rep = run_experiment(cfg, seed)
    files = emit_outputs(rep, out_dir)
    return rep, files


def run_many(configs, out_root, jobs: int = 1, seed: int | None = None) -> dict:
    """Run experiments (each in its own output directory) and write summary.json."""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    tasks = [(c, seed, out_root / c.name) for c in configs]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    summary = {"experiments": [], "all_passed": True}
    for (rep, files), (cfg, _, _) in zip(results, tasks):
        summary["experiments"].append({
            "name": cfg.name, "theorem": cfg.theorem, "d": cfg.d, "passed": bool(rep.passed),
            "fit_slope": rep.fit_slope, "reference_slope": rep.reference_slope,
            "checks": _jsonable(rep.details.get("checks", {})),
            "files": [os.path.relpath(f, out_root) for f in files],
        })
        summary["all_passed"] = summary["all_passed"] and bool(rep.passed)
    with open(out_root / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


__all__ = ["ExperimentConfig", "RateReport", "fit_rate", "run_experiment", "emit_outputs", "run_many",
           "render_svg", "packaged_experiments", "resolve_config", "THEOREMS", "asdict"]
