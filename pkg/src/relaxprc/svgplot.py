"""Minimal static SVG 1.1 plotter: axes, polylines and point markers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass
class Series:
    x: list
    y: list
    kind: str = "line"  # "line" or "dots"
    label: str = ""
    color: str | None = None
    break_jumps: float | None = None  # split the polyline where |dy| exceeds this


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    out = []
    v = start
    while v <= hi + 1e-9 * span:
        out.append(round(v, 12))
        v += step
    return out


def render(series: list[Series], *, title: str = "", xlabel: str = "", ylabel: str = "",
           xlim: tuple[float, float] | None = None, ylim: tuple[float, float] | None = None,
           width: int = 640, height: int = 420) -> str:
    """Render the series to an SVG document string."""
    xs = [v for s in series for v in s.x if math.isfinite(v)]
    ys = [v for s in series for v in s.y if math.isfinite(v)]
    if xlim is None:
        xlim = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if ylim is None:
        lo, hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
        pad = 0.05 * (hi - lo or 1.0)
        ylim = (lo - pad, hi + pad)
    ml, mr, mt, mb = 64, 150, 36, 48
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - xlim[0]) / (xlim[1] - xlim[0]) * pw

    def py(y):
        return mt + ph - (y - ylim[0]) / (ylim[1] - ylim[0]) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(*xlim):
        X = _fmt(px(t))
        out.append(f'<line x1="{X}" y1="{mt + ph}" x2="{X}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{mt + ph + 18}" font-size="11" '
                   f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(*ylim):
        Y = _fmt(py(t))
        out.append(f'<line x1="{ml - 5}" y1="{Y}" x2="{ml}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y}" font-size="11" text-anchor="end" '
                   f'dominant-baseline="middle">{t:g}</text>')
    if ylim[0] < 0 < ylim[1]:
        Y = _fmt(py(0.0))
        out.append(f'<line x1="{ml}" y1="{Y}" x2="{ml + pw}" y2="{Y}" stroke="#bbbbbb" '
                   f'stroke-dasharray="4,3"/>')
    if title:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="22" font-size="14" '
                   f'text-anchor="middle">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" font-size="12" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{mt + ph / 2:.2f}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 16 {mt + ph / 2:.2f})">{escape(ylabel)}</text>')

    out.append(f'<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/>'
               f'</clipPath>')
    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        pts = [(x, y) for x, y in zip(s.x, s.y) if math.isfinite(x) and math.isfinite(y)]
        if s.kind == "line":
            runs, cur = [], []
            for p in pts:
                if cur and s.break_jumps is not None and abs(p[1] - cur[-1][1]) > s.break_jumps:
                    runs.append(cur)
                    cur = []
                cur.append(p)
            if cur:
                runs.append(cur)
            for run in runs:
                coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in run)
                out.append(f'<polyline clip-path="url(#plot)" fill="none" stroke="{color}" '
                           f'stroke-width="1.8" points="{coords}"/>')
        else:
            for x, y in pts:
                out.append(f'<circle clip-path="url(#plot)" cx="{_fmt(px(x))}" '
                           f'cy="{_fmt(py(y))}" r="2.2" fill="{color}"/>')
        if s.label:
            ly = mt + 14 + 18 * i
            lx = ml + pw + 12
            if s.kind == "line":
                out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" '
                           f'stroke="{color}" stroke-width="1.8"/>')
            else:
                out.append(f'<circle cx="{lx + 9}" cy="{ly}" r="2.5" fill="{color}"/>')
            out.append(f'<text x="{lx + 24}" y="{ly}" font-size="11" '
                       f'dominant-baseline="middle">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
