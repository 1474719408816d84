import csv
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperheat.bench import (ExperimentConfig, RateReport, emit_outputs, fit_rate, packaged_experiments,
                             resolve_config, run_experiment, run_many, solver_config_from_json)
from hyperheat.cli import main, read_snapshots

T = np.geomspace(2.0, 60.0, 12)


# -- fitting ---------------------------------------------------------------------------

@given(st.floats(-3.0, 1.0), st.floats(1e-3, 1e3))
def test_power_law_exact(alpha, c):
    rep = fit_rate(T, c * T ** alpha)
    assert rep.fit_slope == pytest.approx(alpha, abs=1e-12)
    assert rep.fit_stderr < 1e-10


@given(st.floats(-2.0, -0.1), st.floats(1e-3, 10.0))
def test_exp_times_power_exact(lam, c):
    t = np.linspace(2.0, 30.0, 12)
    rep = fit_rate(t, c * np.exp(lam * t) / t ** 2, "exp_times_power")
    assert rep.fit_slope == pytest.approx(lam, abs=1e-10)
    assert np.allclose(rep.fitted(t), c * np.exp(lam * t) / t ** 2, rtol=1e-9)


def test_noisy_power_law():
    rng = np.random.default_rng(3)
    t = np.geomspace(2.0, 200.0, 30)
    n = t ** -0.5 * np.exp(rng.normal(0.0, 0.05, t.size))
    rep = fit_rate(t, n)
    assert abs(rep.fit_slope + 0.5) < 0.05
    assert rep.fit_stderr > 0


def test_fit_window_selects_points():
    n = np.where(T < 10, 1.0, T ** -1.0)
    rep = fit_rate(T, n, window=(10.0, 60.0))
    assert rep.fit_slope == pytest.approx(-1.0, abs=1e-12)
    assert rep.fit_window[0] >= 10.0


def test_reference_curve_anchored():
    rep = fit_rate(T, 2.0 * T ** -0.7, window=(T[3], T[-1]), reference_slope=-0.5)
    ref = rep.reference_curve()
    assert ref[3] == pytest.approx(rep.norms[3])
    assert ref[-1] / ref[3] == pytest.approx((T[-1] / T[3]) ** -0.5)


@pytest.mark.parametrize("norms", [
    [1.0, 0.5, 0.0, 0.2, 0.1], [1.0, 0.5, -1.0, 0.2, 0.1], [1.0, math.nan, 0.3, 0.2, 0.1]])
def test_fit_rejects_bad_norms(norms):
    with pytest.raises(ValueError):
        fit_rate([1, 2, 3, 4, 5], norms)


def test_fit_rejects_short_or_degenerate():
    with pytest.raises(ValueError):
        fit_rate([1, 2, 3], [1, 1, 1])
    with pytest.raises(ValueError):
        fit_rate([2, 2, 2, 2], [1, 2, 3, 4])
    with pytest.raises(ValueError):
        fit_rate(T, T ** -0.5, model="cubic")
    with pytest.raises(ValueError):
        fit_rate(T, T ** -0.5, window=(100.0, 200.0))


def test_report_validation():
    with pytest.raises(ValueError):
        RateReport([1, 2, 3], [1, 1, 1], -0.5, 0.0, (1, 3), -0.5)
    with pytest.raises(ValueError):
        RateReport([1, 2, 3, 4], [1, 1, 1, 1], -0.5, 0.0, (0.5, 4), -0.5)


# -- outputs --------------------------------------------------------------------------

def test_emit_refuses_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_outputs(None, tmp_path)


def test_emit_round_trip(tmp_path):
    rep = fit_rate(T, 3.0 * T ** -0.5, name="demo", theorem="radial_L1")
    rep.passed = True
    rep.details["checks"] = {"slope": True}
    csv_path, json_path, svg_path = emit_outputs(rep, tmp_path)
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "norm", "reference_curve"]
    data = np.array(rows[1:], dtype=float)
    assert np.array_equal(data[:, 0], np.asarray(rep.times))
    assert np.array_equal(data[:, 1], np.asarray(rep.norms))
    payload = json.loads(json_path.read_text())
    for key in ("fit_slope", "fit_stderr", "fit_window", "reference_slope", "model", "passed"):
        assert key in payload
    assert payload["fit_slope"] == rep.fit_slope
    root = ET.fromstring(svg_path.read_text())
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline[@class='data']")) == 1
    assert len(root.findall(f"{ns}line[@class='fit']")) == 1
    assert len(root.find(f"{ns}polyline").get("points").split()) == len(T)


# -- configs ---------------------------------------------------------------------------

def test_packaged_configs_load():
    names = packaged_experiments()
    assert len(names) >= 12
    for name in names:
        cfg = resolve_config(name)
        assert cfg.name == name
        if cfg.u0 is not None:
            assert cfg.datum().d == cfg.d


def _raw(**over):
    raw = json.loads(packaged_experiments()["radial_L1_d3"].read_text())
    raw.update(over)
    return raw


@pytest.mark.parametrize("over", [
    {"theorem": "nonsense"}, {"time_grid": [3, 2, 5, 6]}, {"time_grid": [-1, 2, 3, 4]},
    {"u0": {"kind": "horo_bumps", "bumps": [{"center": 0, "mass": 1, "width": 1}]}},
    {"fit": {"model": "cubic"}}, {"d": 1}])
def test_invalid_configs(over):
    with pytest.raises((ValueError, KeyError)):
        ExperimentConfig.from_dict(_raw(**over))


def test_unknown_config_name():
    with pytest.raises(FileNotFoundError):
        resolve_config("no_such_experiment")


def test_time_grid_forms():
    a = ExperimentConfig.from_dict(_raw(time_grid={"geomspace": [2, 60, 16]}))
    b = ExperimentConfig.from_dict(_raw(time_grid=list(np.geomspace(2, 60, 16))))
    assert np.allclose(a.time_grid, b.time_grid)


# -- runs ------------------------------------------------------------------------------

def test_run_deterministic(tmp_path):
    cfg = resolve_config("phi_limit_d3")
    a = emit_outputs(run_experiment(cfg), tmp_path / "a")
    b = emit_outputs(run_experiment(cfg), tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


def test_run_many_summary(tmp_path):
    cfgs = [resolve_config("phi_limit_d3"), resolve_config("C_bounds_d2")]
    summary = run_many(cfgs, tmp_path, jobs=2)
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    assert on_disk["all_passed"] == summary["all_passed"] == all(e["passed"] for e in on_disk["experiments"])
    for e in on_disk["experiments"]:
        for f in e["files"]:
            assert (tmp_path / f).exists()
        assert f"{e['name']}/" in e["files"][0]


def test_bad_solver_settings():
    with pytest.raises(ValueError):
        solver_config_from_json({"dt_max": 0.1})
    with pytest.raises(ValueError):
        solver_config_from_json({"max_dt": -1.0})
    assert solver_config_from_json({"W": 14}).domain_width_W == 14


# -- command line ------------------------------------------------------------------------

def test_cli_list(capsys):
    assert main(["list-experiments"]) == 0
    assert "radial_L1_d3" in capsys.readouterr().out


def test_cli_run_exit_code(tmp_path, capsys):
    code = main(["run", "--config", "phi_limit_d3", "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert code == (0 if summary["all_passed"] else 1)
    assert (tmp_path / "phi_limit_d3" / "phi_limit_d3_norms.csv").exists()


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--config", "missing_thing", "--out", str(tmp_path)]) == 2
    assert main(["run", "--config", "phi_limit_d3", "--jobs", "0", "--out", str(tmp_path)]) == 2
    assert main(["phi", "--d", "3", "--ry", "1", "--cos-angle", "2"]) == 2


def test_cli_kernel(capsys):
    assert main(["kernel", "check-normalization", "--d", "3", "--t", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-6)
    assert main(["kernel", "eval", "--d", "3", "--t", "1", "--r", "0", "--log"]) == 0
    assert math.isfinite(float(capsys.readouterr().out))


def test_cli_solve_and_entropy(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 2, "u0": {"kind": "radial_bump", "mass": 1.0, "width": 1.0}}))
    snaps = tmp_path / "snaps"
    assert main(["solve", "radial", "--config", str(cfg), "--checkpoints", "1,3,7,15", "--out", str(snaps)]) == 0
    gs = read_snapshots(snaps)
    assert [g.t for g in gs] == [1.0, 3.0, 7.0, 15.0]
    assert gs[-1].mass() == pytest.approx(gs[0].mass(), rel=1e-10)
    out = tmp_path / "ent.csv"
    assert main(["entropy", "--snapshots", str(snaps), "--ref", "radial", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["t", "tau", "H", "D", "l1_gap", "ck_lhs", "ck_rhs"]
    H = [float(r[2]) for r in rows[1:]]
    assert all(h >= 0 for h in H) and H[-1] < H[0]
