import json
import math
import os

import numpy as np
import pytest

from pistonlab import outputs as io
from pistonlab.asymptotics import FitRow, fit_power_law, prefactor_ratio
from pistonlab.cli import main
from pistonlab.moc import SolutionTrace

BASE = """
[gas]
gamma = 2
rho_inf = 0.6666666666666666
[piston]
type = constant
w0 = 1
[solver]
t_end = 2
n_nodes = 12
oracle_cells = 400
[output]
snapshots = 3
"""

DECAYING = """
[gas]
gamma = 1.4
rho_inf = 1e-3
[piston]
type = decaying
w_a = 1
w_b = auto
[solver]
t_end = 3
n_nodes = 15
oracle_cells = 800
[monitor]
sample_points = 10
[output]
snapshots = 3
"""


def _cfg(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out.strip().splitlines()[-1] if out.out.strip() else None, out.err


def test_steady_json(tmp_path, capsys):
    code, d, _ = _run(capsys, ["steady", "--config", _cfg(tmp_path, BASE), "--out", str(tmp_path / "o")])
    assert code == 0
    j = io.read_json(os.path.join(d, "steady.json"))
    assert j["tau"] == pytest.approx(2.0, abs=1e-12) and j["s0"] == pytest.approx(2.0, abs=1e-12)
    assert set(j) >= {"header", "rho0", "u0", "s0", "tau", "residuals"}
    assert "config_hash" in j["header"] and "numpy" in j["header"]
    assert os.path.exists(os.path.join(d, "config.echo"))


def test_usage_errors(tmp_path, capsys):
    assert main(["nonsense"]) == 1
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 1
    bad = _cfg(tmp_path, BASE.replace("gamma = 2", "gamma = 3.5"))
    code, _, err = _run(capsys, ["steady", "--config", bad])
    assert code == 1 and "γ∈(1,3)" in err
    dec = _cfg(tmp_path, DECAYING, "d.ini")
    assert main(["steady", "--config", dec, "--out", str(tmp_path / "o2")]) == 1
    assert not os.path.exists(tmp_path / "o2")
    assert main(["check", "--config", dec, "--out", str(tmp_path / "o3")]) == 1


def test_env_overrides_out(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PISTON_OUT", str(tmp_path / "env"))
    code, d, _ = _run(capsys, ["steady", "--config", _cfg(tmp_path, BASE), "--out", str(tmp_path / "flag")])
    assert code == 0 and d.startswith(str(tmp_path / "env"))


def test_simulate_outputs_and_determinism(tmp_path, capsys):
    cfg = _cfg(tmp_path, DECAYING)
    dirs = []
    for _ in range(2):
        code, d, _ = _run(capsys, ["simulate", "--config", cfg, "--out", str(tmp_path / "o"), "--plots", "svg"])
        assert code == 0
        dirs.append(d)
    for name in ("snapshots.csv", "shock.csv", "summary.json"):
        a = open(os.path.join(dirs[0], name), "rb").read()
        b = open(os.path.join(dirs[1], name), "rb").read()
        assert a == b
    snap = open(os.path.join(dirs[0], "snapshots.csv")).read().splitlines()
    assert snap[0].startswith("# config_hash=")
    assert snap[1] == "t,x,rho,u,c,dpc,dmc,source"
    shock = io.read_csv(os.path.join(dirs[0], "shock.csv"))
    assert list(shock) == ["t", "s", "s_prime", "k", "k_g", "a", "b"]
    summary = io.read_json(os.path.join(dirs[0], "summary.json"))
    assert summary["ok"] and summary["stamp"] == "assumptions-ok"
    assert open(os.path.join(dirs[0], "snapshots.svg")).read().startswith("<svg")

    code, d, _ = _run(capsys, ["check", "--config", cfg, "--trace", dirs[0], "--out", str(tmp_path / "o")])
    assert code == 0
    chk = io.read_json(os.path.join(d, "check.json"))
    assert chk["hypothesis"]["levels"] > 0
    assert chk["narrow"]["pass"] + chk["narrow"]["fail"] + chk["narrow"]["inconclusive"] == 10


def test_violated_assumptions_stamp(tmp_path, capsys):
    text = DECAYING.replace("w_b = auto", "w_b = 0.5")
    code, d, _ = _run(capsys, ["simulate", "--config", _cfg(tmp_path, text), "--out", str(tmp_path / "o")])
    assert code == 0
    assert io.read_json(os.path.join(d, "summary.json"))["stamp"] == "assumptions-violated"


def test_compare_self_contained(tmp_path, capsys):
    code, d, _ = _run(capsys, ["compare", "--config", _cfg(tmp_path, DECAYING), "--out", str(tmp_path / "o")])
    assert code == 0
    j = io.read_json(os.path.join(d, "compare.json"))
    assert j["n_points"] >= 2
    assert j["post_shock_u_max_rel"] < 0.05


def test_json_format(tmp_path, capsys):
    code, d, _ = _run(capsys, ["oracle", "--config", _cfg(tmp_path, BASE), "--out", str(tmp_path / "o"),
                               "--format", "json"])
    assert code == 0
    j = io.read_json(os.path.join(d, "oracle.json"))
    assert j["columns"] == list(io.ORACLE_COLUMNS) and j["rows"]


def test_numerical_failure_exit_code(tmp_path, capsys):
    # a tabulated piston that stops dead violates positivity of w' and stalls the wedge
    text = BASE.replace("type = constant\nw0 = 1", "type = tabulated\nknots = 0:1, 1.2:1, 1.5:-3")
    text = text.replace("t_end = 2", "t_end = 4")
    code, d, err = _run(capsys, ["simulate", "--config", _cfg(tmp_path, text), "--out", str(tmp_path / "o")])
    assert code == 2 and "numerical failure" in err
    runs = os.listdir(tmp_path / "o")
    failure = io.read_json(os.path.join(tmp_path / "o", runs[0], "failure.json"))
    assert failure["kind"]


def test_sweep_fits_recompute(tmp_path, capsys):
    text = BASE + "[sweep]\ngammas = 2.0\nrho_count = 5\n"
    code, d, _ = _run(capsys, ["sweep-steady", "--config", _cfg(tmp_path, text), "--out", str(tmp_path / "o"),
                               "--plots", "svg"])
    assert code == 0
    vals = io.read_csv(os.path.join(d, "sweep.csv"))
    fits = io.read_json(os.path.join(d, "fits.json"))["fits"]
    for key, f in fits.items():
        sel = vals["quantity"] == f["quantity"]
        x, y = vals["rho_inf"][sel], vals["value"][sel]
        fit = fit_power_law(np.column_stack([x, y]))
        row = FitRow(f["gamma"], f["quantity"], fit, f["paper_exponent"], f["paper_prefactor"],
                     prefactor_ratio(x, y, f["paper_exponent"], f["paper_prefactor"]),
                     f["exponent_tol"], f["prefactor_tol"], f["relation"])
        assert fit.exponent == f["exponent"]
        assert row.passed == f["pass"]
    assert os.path.exists(os.path.join(d, "fits_gamma2.svg"))


def test_sweep_kg_cli(tmp_path, capsys):
    code, d, _ = _run(capsys, ["sweep-kg", "--config", _cfg(tmp_path, BASE), "--out", str(tmp_path / "o")])
    assert code == 0 and io.read_json(os.path.join(d, "fits.json"))["all_pass"]


def test_empty_tables(tmp_path):
    p = tmp_path / "e.csv"
    io.write_csv(p, io.SNAPSHOT_COLUMNS, [], "h")
    lines = p.read_text().splitlines()
    assert len(lines) == 2 and lines[1] == ",".join(io.SNAPSHOT_COLUMNS)
    tr = SolutionTrace(gamma=1.4, rho_inf=0.1, spec=None, n_nodes=3)
    io.write_csv(tmp_path / "s.csv", io.SHOCK_COLUMNS, io.shock_rows(tr), "h")
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 2
    io.write_json(tmp_path / "e.json", {"rows": [], "t": np.array([])}, "h")
    j = json.loads((tmp_path / "e.json").read_text())
    assert j["rows"] == [] and j["t"] == []


def test_float_round_trip(tmp_path):
    vals = [0.1, 1 / 3, math.pi * 1e-300, 2.0 ** -1074, 1.7976931348623157e308, float("nan")]
    io.write_json(tmp_path / "f.json", {"v": vals}, "h")
    back = io.read_json(tmp_path / "f.json")["v"]
    assert back[:-1] == vals[:-1] and back[-1] is None
    io.write_csv(tmp_path / "f.csv", ("a",), [(v,) for v in vals[:-1]], "h")
    assert list(io.read_csv(tmp_path / "f.csv")["a"]) == vals[:-1]


def test_trace_round_trip(tmp_path):
    from pistonlab.moc import run
    from pistonlab.piston import Decaying
    spec = Decaying(1.0, 0.01)
    tr = run(spec, 0.01, 1.4, 1.0, 1.5, 8)
    io.save_trace(tmp_path / "t.npz", tr)
    back = io.load_trace(tmp_path / "t.npz", spec)
    assert len(back.levels) == len(tr.levels)
    np.testing.assert_array_equal(back.levels[-1].r_plus, tr.levels[-1].r_plus)
    np.testing.assert_array_equal(back.shock_history()["k"], tr.shock_history()["k"])
