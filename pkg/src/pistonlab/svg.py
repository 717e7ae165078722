"""Static SVG plots: log-log fits and solution profiles."""
from __future__ import annotations

import math

import numpy as np

W, H, PAD = 480, 360, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _num(v):
    return "%.2f" % v


def _frame(title, xlabel, ylabel, xlim, ylim, log):
    lab = (lambda v: "1e%d" % round(v)) if log else (lambda v: "%.3g" % v)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{PAD}" y="{PAD // 2}" width="{W - 1.5 * PAD}" height="{H - 1.5 * PAD}" fill="none" stroke="black"/>',
           f'<text x="{W / 2}" y="16" text-anchor="middle" font-size="13">{title}</text>',
           f'<text x="{W / 2}" y="{H - 8}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {H / 2})">{ylabel}</text>']
    for v, anchor in ((xlim[0], "start"), (xlim[1], "end")):
        x = PAD if anchor == "start" else W - PAD // 2
        out.append(f'<text x="{x}" y="{H - PAD + 16}" text-anchor="{anchor}" font-size="10">{lab(v)}</text>')
    for v, y in ((ylim[0], H - PAD), (ylim[1], PAD // 2 + 10)):
        out.append(f'<text x="{PAD - 4}" y="{y}" text-anchor="end" font-size="10">{lab(v)}</text>')
    return out


def loglog(series, title="", xlabel="x", ylabel="y") -> str:
    """series: list of (label, x, y, fit) with fit = (exponent, log_prefactor) or None."""
    lx = np.concatenate([np.log10(np.asarray(s[1], float)) for s in series])
    ly = np.concatenate([np.log10(np.asarray(s[2], float)) for s in series])
    xlim = (math.floor(lx.min()), math.ceil(lx.max()))
    ylim = (math.floor(ly.min()), math.ceil(ly.max()))
    fx = _scale(*xlim, PAD, W - PAD // 2)
    fy = _scale(*ylim, H - PAD, PAD // 2)
    out = _frame(title, xlabel, ylabel, xlim, ylim, True)
    for i, (label, x, y, fit) in enumerate(series):
        col = COLORS[i % len(COLORS)]
        for a, b in zip(np.log10(x), np.log10(y)):
            out.append(f'<circle cx="{_num(fx(a))}" cy="{_num(fy(b))}" r="3" fill="{col}"/>')
        if fit is not None:
            e, lp = fit
            a0, a1 = float(np.log10(np.min(x))), float(np.log10(np.max(x)))
            b0, b1 = (lp / math.log(10) + e * a for a in (a0, a1))
            out.append(f'<line x1="{_num(fx(a0))}" y1="{_num(fy(b0))}" x2="{_num(fx(a1))}" y2="{_num(fy(b1))}" '
                       f'stroke="{col}"/>')
        out.append(f'<text x="{PAD + 6}" y="{PAD // 2 + 14 + 13 * i}" font-size="10" fill="{col}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def profiles(curves, title="", xlabel="x", ylabel="y") -> str:
    """curves: list of (label, x, y) drawn as polylines on linear axes."""
    xs = np.concatenate([np.asarray(c[1], float) for c in curves])
    ys = np.concatenate([np.asarray(c[2], float) for c in curves])
    xlim, ylim = (float(xs.min()), float(xs.max())), (float(ys.min()), float(ys.max()))
    fx = _scale(*xlim, PAD, W - PAD // 2)
    fy = _scale(*ylim, H - PAD, PAD // 2)
    out = _frame(title, xlabel, ylabel, xlim, ylim, False)
    for i, (label, x, y) in enumerate(curves):
        col = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_num(fx(a))},{_num(fy(b))}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}"/>')
    if curves:
        out.append(f'<text x="{PAD + 6}" y="{PAD // 2 + 14}" font-size="10">{curves[0][0]} .. {curves[-1][0]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
