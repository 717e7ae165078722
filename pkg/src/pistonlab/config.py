"""Sectioned key-value run configuration.

Sections: [gas], [piston], [solver], [monitor], [output], [sweep]. Every
violation is collected and reported with its line number.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import asdict, dataclass, field

from .gas import DomainError
from .piston import Constant, Decaying, LogPeriodic, Tabulated, a3_amplitude, spec_to_dict


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _floats(s):
    return tuple(float(p) for p in s.replace(",", " ").split())


def _choice(*opts):
    def conv(s):
        if s not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}")
        return s
    return conv


def _knots(s):
    out = []
    for item in s.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        t, v = item.split(":")
        out.append((float(t), float(v)))
    return tuple(out)


def _open(lo, hi):
    return lambda v: lo < v < hi


def _pos(v):
    return v > 0.0


def _nonneg(v):
    return v >= 0.0


# section -> key -> (converter, default or REQUIRED, check, range text)
REQUIRED = object()
SCHEMA = {
    "gas": {
        "gamma": (_float, REQUIRED, _open(1.0, 3.0), "γ∈(1,3)"),
        "rho_inf": (_float, REQUIRED, _open(0.0, 1.0), "rho_inf∈(0,1)"),
    },
    "piston": {
        "type": (_choice("constant", "log_periodic", "decaying", "tabulated"), REQUIRED, None, ""),
        "w0": (_float, None, _pos, "w0 > 0"),
        "w_a": (_float, None, _pos, "w_a > 0"),
        "w_b": (str, None, None, ""),
        "omega": (_float, None, _nonneg, "omega >= 0"),
        "knots": (_knots, None, None, ""),
        "rule": (_choice("pchip"), "pchip", None, ""),
    },
    "solver": {
        "t0": (_float, 1.0, _pos, "t0 > 0"),
        "t_end": (_float, 10.0, _pos, "t_end > 0"),
        "n_nodes": (_int, 50, lambda v: v >= 3, "n_nodes >= 3"),
        "theta": (_float, 0.8, _open(0.0, 1.0), "theta∈(0,1)"),
        "interp": (_choice("pchip", "cubic"), "pchip", None, ""),
        "tol": (_float, 1e-12, _pos, "tol > 0"),
        "snapshot_every": (_int, 1, lambda v: v >= 1, "snapshot_every >= 1"),
        "oracle_cells": (_int, 4000, lambda v: v >= 10, "oracle_cells >= 10"),
        "cfl": (_float, 0.9, _open(0.0, 1.0), "cfl∈(0,1)"),
    },
    "monitor": {
        "delta1": (_float, 0.1, _pos, "delta1 > 0"),
        "delta2": (_float, 0.1, _pos, "delta2 > 0"),
        "kappa": (_float, 1.0, _pos, "kappa > 0"),
        "varrho": (_float, 0.1, _pos, "varrho > 0"),
        "sigma": (_float, 0.1, _pos, "sigma > 0"),
        "sample_points": (_int, 100, lambda v: v >= 1, "sample_points >= 1"),
        "seed": (_int, 0, lambda v: v >= 0, "seed >= 0"),
    },
    "output": {
        "dir": (str, "out", None, ""),
        "format": (_choice("csv", "json"), "csv", None, ""),
        "plots": (_choice("none", "svg"), "none", None, ""),
        "snapshots": (_int, 11, lambda v: v >= 1, "snapshots >= 1"),
    },
    "sweep": {
        "gammas": (_floats, (1.4, 2.0, 2.5), lambda v: len(v) > 0 and all(1.0 < g < 3.0 for g in v), "each γ∈(1,3)"),
        "rho_anchor": (_float, 1e-6, _open(0.0, 1.0), "rho_anchor∈(0,1)"),
        "rho_ratio": (_float, 10 ** -0.5, _open(0.0, 1.0), "rho_ratio∈(0,1)"),
        "rho_count": (_int, 9, lambda v: v >= 4, "rho_count >= 4"),
        "k_lo": (_float, 1e4, lambda v: 1e3 < v < 1e9, "k_lo∈(1e3,1e9)"),
        "k_hi": (_float, 1e8, lambda v: 1e3 < v < 1e9, "k_hi∈(1e3,1e9)"),
        "k_count": (_int, 9, lambda v: v >= 3, "k_count >= 3"),
        "family": (_choice("decaying", "log_periodic", "constant"), "decaying", None, ""),
        "jobs": (_int, 1, lambda v: v >= 1, "jobs >= 1"),
    },
}

PISTON_KEYS = {
    "constant": ("w0",),
    "log_periodic": ("w_a", "w_b", "omega"),
    "decaying": ("w_a", "w_b"),
    "tabulated": ("knots",),
}


@dataclass
class RunConfig:
    gamma: float
    rho_inf: float
    piston: object
    t0: float = 1.0
    t_end: float = 10.0
    n_nodes: int = 50
    theta: float = 0.8
    interp: str = "pchip"
    tol: float = 1e-12
    snapshot_every: int = 1
    oracle_cells: int = 4000
    cfl: float = 0.9
    delta1: float = 0.1
    delta2: float = 0.1
    kappa: float = 1.0
    varrho: float = 0.1
    sigma: float = 0.1
    sample_points: int = 100
    seed: int = 0
    out_dir: str = "out"
    fmt: str = "csv"
    plots: str = "none"
    snapshots: int = 11
    sweep: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["piston"] = spec_to_dict(self.piston)
        return d

    def echo(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def hash(self) -> str:
        """Hash of the resolved settings; output location is left out."""
        d = self.to_dict()
        for k in ("out_dir", "fmt", "plots"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _line_map(text: str) -> dict:
    """(section, key) -> line number, and section -> header line."""
    where, section = {}, None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = n
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), n)
    return where


def parse_config(text: str) -> RunConfig:
    """Validate everything and raise ConfigError listing every violation."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        line = getattr(e, "lineno", None)
        raise ConfigError([f"line {line}: {e.message}" if line else str(e)]) from None
    lines = _line_map(text)
    problems = []

    def at(section, key=None):
        n = lines.get((section, key))
        return f"line {n}: " if n else ""

    values = {}
    for section in cp.sections():
        if section not in SCHEMA:
            problems.append(f"{at(section)}unknown section [{section}]")
    for section, keys in SCHEMA.items():
        have = cp[section] if cp.has_section(section) else {}
        for key in have:
            if key not in keys:
                problems.append(f"{at(section, key)}unknown key '{key}' in [{section}]")
        for key, (conv, default, check, rng) in keys.items():
            if key not in have:
                if default is REQUIRED:
                    problems.append(f"missing required key '{key}' in [{section}]")
                values[(section, key)] = None if default is REQUIRED else default
                continue
            raw = have[key]
            try:
                v = conv(raw)
            except (ValueError, TypeError) as e:
                problems.append(f"{at(section, key)}[{section}] {key}={raw!r}: {e}")
                values[(section, key)] = None
                continue
            if check is not None and not check(v):
                problems.append(f"{at(section, key)}[{section}] {key}={raw} out of range {rng}")
                v = None
            values[(section, key)] = v

    spec = None
    ptype = values[("piston", "type")]
    if ptype is not None:
        for key in PISTON_KEYS[ptype]:
            if values[("piston", key)] is None and cp.has_section("piston") and key not in cp["piston"]:
                problems.append(f"{at('piston', 'type')}piston type {ptype} needs key '{key}'")
        gamma, rho_inf = values[("gas", "gamma")], values[("gas", "rho_inf")]
        w_b = values[("piston", "w_b")]
        if w_b is not None:
            if w_b.strip() == "auto":
                if gamma is not None and rho_inf is not None:
                    w_b = a3_amplitude(rho_inf, gamma, values[("monitor", "kappa")] or 1.0,
                                       values[("monitor", "varrho")] or 0.1)
                    if ptype == "log_periodic" and values[("piston", "omega")]:
                        w_b /= values[("piston", "omega")]
                else:
                    w_b = None
            else:
                try:
                    w_b = float(w_b)
                except ValueError:
                    problems.append(f"{at('piston', 'w_b')}[piston] w_b={w_b!r}: expected a number or 'auto'")
                    w_b = None
        p = {k: values[("piston", k)] for k in ("w0", "w_a", "omega", "knots", "rule")}
        try:
            if ptype == "constant" and p["w0"] is not None:
                spec = Constant(p["w0"])
            elif ptype == "decaying" and None not in (p["w_a"], w_b):
                spec = Decaying(p["w_a"], w_b)
            elif ptype == "log_periodic" and None not in (p["w_a"], w_b, p["omega"]):
                spec = LogPeriodic(p["w_a"], w_b, p["omega"])
            elif ptype == "tabulated" and p["knots"] is not None:
                spec = Tabulated(p["knots"], p["rule"])
        except DomainError as e:
            problems.append(f"{at('piston', 'type')}[piston] {e}")

    t0, t_end = values[("solver", "t0")], values[("solver", "t_end")]
    if t0 is not None and t_end is not None and not t_end > t0:
        problems.append(f"{at('solver', 't_end')}[solver] t_end={t_end} must exceed t0={t0}")
    k_lo, k_hi = values[("sweep", "k_lo")], values[("sweep", "k_hi")]
    if k_lo is not None and k_hi is not None and not k_hi > k_lo:
        problems.append(f"{at('sweep', 'k_hi')}[sweep] k_hi must exceed k_lo")
    if problems:
        raise ConfigError(problems)

    v = {k[1]: val for k, val in values.items() if k[0] in ("solver", "monitor")}
    return RunConfig(gamma=values[("gas", "gamma")], rho_inf=values[("gas", "rho_inf")], piston=spec,
                     out_dir=values[("output", "dir")], fmt=values[("output", "format")],
                     plots=values[("output", "plots")], snapshots=values[("output", "snapshots")],
                     sweep={k[1]: val for k, val in values.items() if k[0] == "sweep"}, **v)
