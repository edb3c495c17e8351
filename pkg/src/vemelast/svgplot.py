"""Minimal self-contained log-log SVG plots for convergence curves.

One static SVG file per plot: decade grid, one polyline with markers
per series, optional reference-slope guide lines, and a legend.  No
plotting package involved, so study outputs stay dependency-free.
"""
from __future__ import annotations

import math

_PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
]

_W, _H = 720, 520
_ML, _MR, _MT, _MB = 80, 30, 46, 64


def _decades(lo: float, hi: float):
    start = math.floor(math.log10(lo))
    stop = math.ceil(math.log10(hi))
    return [10.0 ** k for k in range(start, stop + 1)]


def loglog_svg(path, series, title: str = "", xlabel: str = "",
               ylabel: str = "", slope_guides=()) -> None:
    """Write a log-log plot.

    series: iterable of (label, xs, ys) with positive data.
    slope_guides: iterable of slopes; each is drawn anchored at the
    last point of the first series and labeled "slope s".
    """
    series = [(lbl, list(xs), list(ys)) for lbl, xs, ys in series]
    if not series or any(len(xs) == 0 for _, xs, _ in series):
        raise ValueError("every series needs at least one point")
    allx = [x for _, xs, _ in series for x in xs]
    ally = [y for _, _, ys in series for y in ys]
    if min(allx) <= 0 or min(ally) <= 0:
        raise ValueError("log-log plot needs positive data")
    xdec = _decades(min(allx), max(allx))
    ydec = _decades(min(ally), max(ally))
    lx0, lx1 = math.log10(xdec[0]), math.log10(xdec[-1])
    ly0, ly1 = math.log10(ydec[0]), math.log10(ydec[-1])
    if lx1 == lx0:
        lx1 += 1.0
    if ly1 == ly0:
        ly1 += 1.0

    def px(x):
        return _ML + (math.log10(x) - lx0) / (lx1 - lx0) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (math.log10(y) - ly0) / (ly1 - ly0) * (_H - _MT - _MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
    ]
    # grid and tick labels
    for xv in xdec:
        X = px(xv)
        out.append(f'<line x1="{X:.1f}" y1="{_MT}" x2="{X:.1f}" y2="{_H - _MB}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{X:.1f}" y="{_H - _MB + 18}" text-anchor="middle" '
                   f'font-size="11">1e{int(math.log10(xv))}</text>')
    for yv in ydec:
        Y = py(yv)
        out.append(f'<line x1="{_ML}" y1="{Y:.1f}" x2="{_W - _MR}" y2="{Y:.1f}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{_ML - 8}" y="{Y + 4:.1f}" text-anchor="end" '
                   f'font-size="11">1e{int(math.log10(yv))}</text>')
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
               f'height="{_H - _MT - _MB}" fill="none" stroke="#333333"/>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 16}" text-anchor="middle" '
               f'font-size="13">{xlabel}</text>')
    out.append(f'<text x="20" y="{_H / 2:.1f}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 20 {_H / 2:.1f})">{ylabel}</text>')

    # reference slopes anchored at the last point of the first series
    x_anchor = series[0][1][-1]
    y_anchor = series[0][2][-1]
    xs_guide = [min(allx), max(allx)]
    for s in slope_guides:
        ys_guide = [0.6 * y_anchor * (x / x_anchor) ** s for x in xs_guide]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs_guide, ys_guide))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#999999" '
                   'stroke-width="1" stroke-dasharray="6,4"/>')
        out.append(f'<text x="{px(xs_guide[-1]) - 4:.1f}" '
                   f'y="{py(ys_guide[-1]) - 6:.1f}" text-anchor="end" '
                   f'font-size="11" fill="#777777">slope {s:g}</text>')

    for k, (label, xs, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.8"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3.2" '
                       f'fill="{color}"/>')
        Yl = _MT + 16 + 16 * k
        Xl = _ML + 14
        out.append(f'<line x1="{Xl}" y1="{Yl - 4}" x2="{Xl + 26}" y2="{Yl - 4}" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{Xl + 32}" y="{Yl}" font-size="12">{label}</text>')

    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
