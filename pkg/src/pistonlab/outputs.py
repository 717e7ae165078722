"""File schemas: CSV tables, JSON records and stored traces.

Floats are written with 17 significant digits so every double round-trips.
"""
from __future__ import annotations

import json
import math
import os

import numpy as np
import scipy

from . import __version__
from .gas import GasState
from .moc import SolutionTrace, TimeLevel
from .shock_polar import ShockSample

SNAPSHOT_COLUMNS = ("t", "x", "rho", "u", "c", "dpc", "dmc", "source")
SHOCK_COLUMNS = ("t", "s", "s_prime", "k", "k_g", "a", "b")
SWEEP_COLUMNS = ("gamma", "rho_inf", "quantity", "value")
ORACLE_COLUMNS = ("t", "shock_m", "shock_x", "plateau_rho", "plateau_u")


def fmt_float(v) -> str:
    return "%.17g" % v


def header(config_hash: str) -> dict:
    return {"config_hash": config_hash, "pistonlab": __version__,
            "numpy": np.__version__, "scipy": scipy.__version__}


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return str(v)


def write_csv(path, columns, rows, config_hash: str) -> None:
    h = header(config_hash)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in h.items()) + "\n")
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(_cell(v) for v in r) + "\n")


def read_csv(path) -> dict:
    """Columns as arrays (strings stay strings); comment lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    cols = lines[0].split(",")
    data = [ln.split(",") for ln in lines[1:] if ln]
    out = {}
    for j, c in enumerate(cols):
        vals = [r[j] for r in data]
        try:
            out[c] = np.array([float(v) for v in vals])
        except ValueError:
            out[c] = np.array(vals)
    return out


def _json_text(obj, indent: int = 0) -> str:
    pad = " " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_text(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + " " * indent + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[" + ", ".join(_json_text(v, indent + 1) for v in seq) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return fmt_float(v) if math.isfinite(v) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps(obj) -> str:
    return _json_text(obj) + "\n"


def write_json(path, obj: dict, config_hash: str) -> None:
    body = {"header": header(config_hash)}
    body.update(obj)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(body))


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def snapshot_rows(level, diag, source: str):
    """Rows of snapshots.csv for one level; diag may be None (derivatives unknown)."""
    n = level.n
    dpc = diag.dpc if diag is not None else np.full(n, math.nan)
    dmc = diag.dmc if diag is not None else np.full(n, math.nan)
    c = level.c(diag.gamma) if diag is not None else None
    return [(level.t, level.x[i], level.rho[i], level.u[i], c[i] if c is not None else math.nan,
             dpc[i], dmc[i], source) for i in range(n)]


def shock_rows(trace: SolutionTrace):
    h = trace.shock_history()
    return list(zip(*(h[k] for k in ("t", "s", "s_prime", "k", "k_g", "a", "b"))))


_LEVEL_SCALARS = ("t", "step", "piston_x")
_SHOCK_SCALARS = ("t", "s", "k", "s_prime", "k_g", "a", "b")


def save_trace(path, trace: SolutionTrace) -> None:
    """Levels and shock history in one .npz (no pickling)."""
    lv = trace.levels
    arrays = {
        "meta": np.array([trace.gamma, trace.rho_inf, trace.n_nodes, trace.n_steps], dtype=float),
        "interp": np.array(trace.interp),
        "level_scalars": np.array([[getattr(L, k) for k in _LEVEL_SCALARS] for L in lv], dtype=float).reshape(-1, 3),
        "level_shock": np.array([[getattr(L.shock, k) for k in _SHOCK_SCALARS] + [L.shock.state.rho, L.shock.state.u]
                                 for L in lv], dtype=float).reshape(-1, 9),
    }
    for name in ("x", "rho", "u", "r_minus", "r_plus"):
        arrays[name] = np.array([getattr(L, name) for L in lv], dtype=float).reshape(len(lv), -1)
    h = trace.shock_history()
    for k, v in h.items():
        arrays["shock_" + k] = v
    np.savez_compressed(path, **arrays)


def load_trace(path, spec) -> SolutionTrace:
    z = np.load(path, allow_pickle=False)
    gamma, rho_inf, n_nodes, n_steps = z["meta"]
    tr = SolutionTrace(gamma=float(gamma), rho_inf=float(rho_inf), spec=spec, n_nodes=int(n_nodes),
                       interp=str(z["interp"]))
    tr.n_steps = int(n_steps)
    for i, (t, step, px) in enumerate(z["level_scalars"]):
        st, s, k, sp, kg, a, b, srho, su = z["level_shock"][i]
        sh = ShockSample(t=float(st), s=float(s), k=float(k), s_prime=float(sp), state=GasState(float(srho), float(su)),
                         k_g=float(kg), a=float(a), b=float(b))
        tr.levels.append(TimeLevel(t=float(t), step=int(step), piston_x=float(px), shock=sh,
                                   x=z["x"][i], rho=z["rho"][i], u=z["u"][i],
                                   r_minus=z["r_minus"][i], r_plus=z["r_plus"][i]))
    for k, attr in (("t", "shock_t"), ("s", "shock_s"), ("s_prime", "shock_sp"), ("k", "shock_k"),
                    ("k_g", "shock_kg"), ("a", "shock_a"), ("b", "shock_b")):
        setattr(tr, attr, list(z["shock_" + k]))
    return tr


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path
