"""Command line: pistonlab <subcommand> [--config PATH] [--out DIR] ...

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(partial outputs and failure.json are still written).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import traceback

import numpy as np

from . import asymptotics as asy
from . import outputs as io
from . import svg
from .config import ConfigError, RunConfig, parse_config
from .diagnostics import char_derivatives, hypothesis_monitor, mass_balance, narrow_check
from .lagrangian import run_oracle, to_eulerian
from .moc import StepConfig, run
from .piston import Constant, spec_from_dict, validate
from .shock_polar import rh_residuals, solve_steady_piston

COMMANDS = ("steady", "simulate", "oracle", "compare", "sweep-steady", "sweep-kg", "sweep-unsteady", "check")
NEEDS_CONFIG = {"steady", "simulate", "oracle", "sweep-unsteady"}


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    def __init__(self, record: dict):
        self.record = record
        super().__init__(record.get("message", ""))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pistonlab", description="Piston-driven shock solver, oracle and sweeps.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="run configuration file")
    p.add_argument("--out", help="output root (PISTON_OUT overrides)")
    p.add_argument("--format", choices=("csv", "json"), help="table format")
    p.add_argument("--plots", choices=("none", "svg"))
    p.add_argument("--jobs", type=int, help="worker processes for sweeps")
    p.add_argument("--trace", help="run directory holding trace.npz (check)")
    p.add_argument("--moc", help="MOC run directory (compare)")
    p.add_argument("--oracle", help="oracle run directory (compare)")
    return p


DEFAULT_TEXT = "[gas]\ngamma = 1.4\nrho_inf = 1e-6\n[piston]\ntype = constant\nw0 = 1\n"


def load_config(args) -> RunConfig:
    if args.config is None:
        if args.command in NEEDS_CONFIG:
            raise UsageError(f"{args.command} needs --config")
        text = DEFAULT_TEXT
    else:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read config: {e}") from None
    cfg = parse_config(text)
    if args.format:
        cfg.fmt = args.format
    if args.plots:
        cfg.plots = args.plots
    if args.jobs is not None:
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        cfg.sweep["jobs"] = args.jobs
    root = os.environ.get("PISTON_OUT") or args.out or cfg.out_dir
    cfg.out_dir = root
    return cfg


class Run:
    """One output directory: out/<config hash>-<timestamp>."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.hash = cfg.hash()
        stamp = time.strftime("%Y%m%dT%H%M%S")
        base = os.path.join(cfg.out_dir, f"{self.hash}-{stamp}")
        path, i = base, 1
        while os.path.exists(path):
            path, i = f"{base}-{i}", i + 1
        self.dir = io.ensure_dir(path)
        with open(self.file("config.echo"), "w", encoding="utf-8") as fh:
            fh.write(cfg.echo() + "\n")
        self.command = command

    def file(self, name):
        return os.path.join(self.dir, name)

    def table(self, name, columns, rows):
        if self.cfg.fmt == "json":
            io.write_json(self.file(name + ".json"), {"columns": list(columns), "rows": [list(r) for r in rows]},
                          self.hash)
        else:
            io.write_csv(self.file(name + ".csv"), columns, rows, self.hash)

    def json(self, name, obj):
        io.write_json(self.file(name), obj, self.hash)

    def svg(self, name, text):
        if self.cfg.plots == "svg":
            with open(self.file(name), "w", encoding="utf-8") as fh:
                fh.write(text)


def cmd_steady(run_: Run) -> dict:
    cfg = run_.cfg
    if not isinstance(cfg.piston, Constant):
        raise UsageError("steady needs piston type = constant")
    st = solve_steady_piston(cfg.piston.w0, cfg.rho_inf, cfg.gamma, tol=cfg.tol)
    res = rh_residuals(st.rho0, st.u0, st.s0, cfg.rho_inf, cfg.gamma)
    out = {"rho0": st.rho0, "u0": st.u0, "s0": st.s0, "tau": st.tau,
           "residuals": {"mass": res[0], "momentum": res[1]}}
    run_.json("steady.json", out)
    return out


def _snapshot_levels(trace, count):
    """Stored levels nearest to evenly spaced times, each with its predecessor."""
    pairs = trace.consecutive()
    if not pairs:
        return []
    tb = np.array([B.t for _, B in pairs])
    targets = np.linspace(tb[0], tb[-1], count)
    idx = sorted({int(np.argmin(np.abs(tb - t))) for t in targets})
    return [pairs[i] for i in idx]


def cmd_simulate(run_: Run) -> dict:
    cfg = run_.cfg
    scfg = StepConfig(theta=cfg.theta, interp=cfg.interp, snapshot_every=cfg.snapshot_every, tol=cfg.tol)
    rep = validate(cfg.piston, cfg.rho_inf, cfg.gamma, cfg.kappa, cfg.varrho, horizon=cfg.t_end)
    trace = run(cfg.piston, cfg.rho_inf, cfg.gamma, cfg.t0, cfg.t_end, cfg.n_nodes, scfg)
    rows, curves = [], []
    for A, B in _snapshot_levels(trace, cfg.snapshots):
        D = char_derivatives(A, B, cfg.gamma, trace.interp)
        rows += io.snapshot_rows(B, D, "moc")
        curves.append((f"t={B.t:.4g}", B.x, B.rho))
    run_.table("snapshots", io.SNAPSHOT_COLUMNS, rows)
    run_.table("shock", io.SHOCK_COLUMNS, io.shock_rows(trace))
    io.save_trace(run_.file("trace.npz"), trace)
    if curves:
        run_.svg("snapshots.svg", svg.profiles(curves, "density profiles", "x", "rho"))
    last = trace.levels[-1]
    mb = mass_balance(trace)
    summary = {"ok": trace.ok, "stamp": "assumptions-ok" if rep.ok else "assumptions-violated",
               "n_steps": trace.n_steps, "levels": len(trace.levels),
               "t_final": last.t, "shock_s": last.shock.s, "piston_x": last.piston_x,
               "rho_min": float(last.rho.min()), "rho_max": float(last.rho.max()),
               "mass_balance_max": float(np.max(np.abs(mb))) if np.size(mb) else 0.0,
               "assumptions": {"ok": rep.ok, "w_star": rep.w_star, "w_upper": rep.w_upper, "ratio": rep.ratio,
                               "a3_sup": rep.a3_sup, "a3_bound": rep.a3_bound, "details": rep.details}}
    run_.json("summary.json", summary)
    if not trace.ok:
        raise NumericalFailure(dict(trace.failure))
    return summary


def _oracle_times(cfg: RunConfig):
    return np.linspace(cfg.t0, cfg.t_end, max(cfg.snapshots, 2))


def cmd_oracle(run_: Run) -> dict:
    cfg = run_.cfg
    tr = run_oracle(cfg.piston, cfg.rho_inf, cfg.gamma, cfg.t_end, cfg.oracle_cells,
                    sample_times=_oracle_times(cfg), cfl=cfg.cfl)
    a = tr.arrays()
    run_.table("oracle", io.ORACLE_COLUMNS, list(zip(*(a[k] for k in io.ORACLE_COLUMNS))))
    w, _, _ = cfg.piston.evaluate(tr.grid.t)
    e = to_eulerian(tr.grid, float(w))
    c = np.sqrt(cfg.gamma) * e[:, 1] ** (0.5 * (cfg.gamma - 1.0))
    rows = [(tr.grid.t, x, r, u, ci, math.nan, math.nan, "oracle") for (x, r, u), ci in zip(e, c)]
    run_.table("snapshots", io.SNAPSHOT_COLUMNS, rows)
    summary = {"tainted": tr.tainted, "momentum_error": tr.momentum_error, "n_steps": tr.n_steps,
               "n_cells": tr.n_cells, "total_mass": tr.total_mass, "samples": len(tr.t)}
    run_.json("summary.json", summary)
    return summary


def _read_table(d, name):
    csv_path, json_path = os.path.join(d, name + ".csv"), os.path.join(d, name + ".json")
    if os.path.exists(csv_path):
        return io.read_csv(csv_path)
    if os.path.exists(json_path):
        j = io.read_json(json_path)
        cols = j["columns"]
        return {c: np.array([r[i] for r in j["rows"]], dtype=float) for i, c in enumerate(cols)}
    raise UsageError(f"no {name} table in {d}")


def compare_tables(shock: dict, oracle: dict) -> dict:
    """Relative deviations of post-shock velocity and shock position, oracle as reference."""
    t_m = shock["t"]
    u_m = shock["s_prime"] * (1.0 - 1.0 / shock["k"])
    sel = (oracle["t"] >= t_m[0]) & (oracle["t"] <= t_m[-1])
    if not np.any(sel):
        raise UsageError("MOC and oracle traces share no time window")
    t_o = oracle["t"][sel]
    u_dev = np.abs(np.interp(t_o, t_m, u_m) / oracle["plateau_u"][sel] - 1.0)
    s_dev = np.abs(np.interp(t_o, t_m, shock["s"]) / oracle["shock_x"][sel] - 1.0)
    return {"n_points": int(sel.sum()), "t_first": float(t_o[0]), "t_last": float(t_o[-1]),
            "post_shock_u_max_rel": float(u_dev.max()), "shock_position_rel_at_last": float(s_dev[-1]),
            "shock_position_max_rel": float(s_dev.max())}


def cmd_compare(run_: Run, args) -> dict:
    if (args.moc is None) != (args.oracle is None):
        raise UsageError("compare takes both --moc and --oracle, or neither")
    if args.moc is None:
        if run_.cfg.piston is None:
            raise UsageError("compare without run directories needs --config")
        moc_dir = os.path.join(run_.dir, "moc")
        orc_dir = os.path.join(run_.dir, "oracle")
        for sub, fn in ((moc_dir, cmd_simulate), (orc_dir, cmd_oracle)):
            child = Run.__new__(Run)
            child.cfg, child.hash, child.command = run_.cfg, run_.hash, run_.command
            child.dir = io.ensure_dir(sub)
            fn(child)
    else:
        moc_dir, orc_dir = args.moc, args.oracle
    out = compare_tables(_read_table(moc_dir, "shock"), _read_table(orc_dir, "oracle"))
    out.update({"moc": moc_dir, "oracle": orc_dir})
    run_.json("compare.json", out)
    return out


def _write_sweep(run_: Run, res: asy.SweepResult, xlabel: str):
    run_.table("sweep", io.SWEEP_COLUMNS, res.values)
    fits = {f"{f.quantity}@gamma={f.gamma:g}": {**f.as_dict(), "exponent_tol": f.exponent_tol,
                                                 "prefactor_tol": f.prefactor_tol} for f in res.fits}
    run_.json("fits.json", {"fits": fits, "all_pass": res.passed})
    if run_.cfg.plots == "svg":
        by_g = {}
        for g, x, q, v in res.values:
            if v > 0.0:
                by_g.setdefault(g, {}).setdefault(q, ([], []))
                by_g[g][q][0].append(x)
                by_g[g][q][1].append(v)
        fit_of = {(f.gamma, f.quantity): (f.fit.exponent, f.fit.log_prefactor) for f in res.fits}
        for g, qs in by_g.items():
            series = [(q, np.array(x), np.array(y), fit_of.get((g, q))) for q, (x, y) in qs.items()
                      if (g, q) in fit_of]
            if series:
                run_.svg(f"fits_gamma{g:g}.svg", svg.loglog(series, f"gamma = {g:g}", xlabel, "value"))
    return {"all_pass": res.passed, "fits": len(res.fits)}


def _rho_grid(cfg: RunConfig):
    s = cfg.sweep
    return asy.geometric_grid(s["rho_anchor"], s["rho_ratio"], s["rho_count"])


def cmd_sweep_steady(run_: Run) -> dict:
    cfg = run_.cfg
    piston = cfg.piston if isinstance(cfg.piston, Constant) else Constant(1.0)
    sc = asy.SweepConfig(gammas=tuple(cfg.sweep["gammas"]), rho_grid=_rho_grid(cfg), piston=piston)
    return _write_sweep(run_, asy.sweep_steady(sc, jobs=cfg.sweep["jobs"]), "rho_inf")


def cmd_sweep_kg(run_: Run) -> dict:
    s = run_.cfg.sweep
    res = asy.sweep_kg(tuple(s["gammas"]), asy.kg_grid(s["k_lo"], s["k_hi"], s["k_count"]))
    return _write_sweep(run_, res, "k")


def cmd_sweep_unsteady(run_: Run) -> dict:
    cfg = run_.cfg
    res = asy.sweep_unsteady(cfg.gamma, _rho_grid(cfg), cfg.sweep["family"], cfg.t0, cfg.t_end,
                             cfg.n_nodes, cfg.delta1, cfg.delta2, jobs=cfg.sweep["jobs"])
    out = _write_sweep(run_, res, "rho_inf")
    df = res.extra.get("density_fit")
    run_.json("unsteady.json", {
        "points": [{k: (bool(v) if k == "ok" else float(v)) for k, v in p.items()} for p in res.extra["points"]],
        "density_fit_observational": None if df is None else {"exponent": df.exponent, "r2": df.r_squared}})
    return out


def cmd_check(run_: Run, args) -> dict:
    if args.trace is None:
        raise UsageError("check needs --trace RUN_DIR")
    echo = os.path.join(args.trace, "config.echo")
    npz = os.path.join(args.trace, "trace.npz")
    if not (os.path.exists(echo) and os.path.exists(npz)):
        raise UsageError(f"{args.trace} has no config.echo/trace.npz")
    with open(echo, encoding="utf-8") as fh:
        stored = json.load(fh)
    spec = spec_from_dict(stored["piston"])
    tr = io.load_trace(npz, spec)
    cfg = run_.cfg
    hyp = hypothesis_monitor(tr, cfg.delta1, cfg.delta2)
    nar = narrow_check(tr, spec, tr.gamma, tr.rho_inf, cfg.delta1, cfg.sigma, cfg.sample_points, cfg.seed,
                       horizon=max(stored["t_end"], 1.0))
    counts = {s: sum(r["status"] == s for r in nar.samples) for s in ("pass", "fail", "inconclusive")}
    out = {"hypothesis": {"levels": int(hyp.t.size), "pass_rate": hyp.pass_rate, "all_pass": hyp.all_pass,
                          "tilde_pass": hyp.tilde_pass, "worst_margins": list(hyp.worst_margins()),
                          "nu_hat": hyp.nu_hat, "delta1": cfg.delta1, "delta2": cfg.delta2},
           "narrow": {**counts, "all_pass": nar.all_pass, "coefficient": nar.coefficient,
                      "width_ok": nar.width_ok, "width_ratio_max": float(np.max(nar.width_ratio))}}
    run_.json("check.json", out)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args)
    except UsageError as e:
        print(f"pistonlab: {e}", file=sys.stderr)
        return 1
    except ConfigError as e:
        for p in e.problems:
            print(f"config: {p}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    if args.command == "steady" and not isinstance(cfg.piston, Constant):
        print("pistonlab: steady needs piston type = constant", file=sys.stderr)
        return 1
    try:
        run_ = Run(cfg, args.command)
    except OSError as e:
        print(f"pistonlab: {e}", file=sys.stderr)
        return 1
    handlers = {"steady": cmd_steady, "simulate": cmd_simulate, "oracle": cmd_oracle,
                "sweep-steady": cmd_sweep_steady, "sweep-kg": cmd_sweep_kg, "sweep-unsteady": cmd_sweep_unsteady}
    try:
        if args.command == "compare":
            cmd_compare(run_, args)
        elif args.command == "check":
            cmd_check(run_, args)
        else:
            handlers[args.command](run_)
    except UsageError as e:
        print(f"pistonlab: {e}", file=sys.stderr)
        return 1
    except NumericalFailure as e:
        run_.json("failure.json", e.record)
        print(f"pistonlab: numerical failure: {e.record.get('message', '')}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as e:
        rec = {"kind": type(e).__name__, "message": str(e), "traceback": traceback.format_exc(limit=4)}
        run_.json("failure.json", rec)
        print(f"pistonlab: numerical failure: {e}", file=sys.stderr)
        return 2
    print(run_.dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
