"""Minimal SVG line charts (axes, ticks, legend, one polyline per curve)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 10))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:g}"


def line_chart(curves, title: str = "", xlabel: str = "t", ylabel: str = "",
               reference: tuple[str, float] | None = None,
               width: int = 720, height: int = 480, max_points: int = 1000) -> str:
    """Render ``curves`` (list of ``(label, x, y)``) as an SVG document string.

    ``reference`` draws a dashed horizontal line with its own legend entry.
    """
    ml, mr, mt, mb = 70, 20, 40, 55
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(c[1], dtype=float) for c in curves])
    ys = np.concatenate([np.asarray(c[2], dtype=float) for c in curves])
    x_lo, x_hi = 0.0, float(xs.max())
    y_vals = list(ys[np.isfinite(ys)])
    if reference is not None:
        y_vals.append(reference[1])
    y_lo = min(0.0, min(y_vals))
    y_hi = max(y_vals)
    y_hi += 0.05 * (y_hi - y_lo or 1.0)

    def X(v):
        return ml + (v - x_lo) / (x_hi - x_lo or 1.0) * pw

    def Y(v):
        return mt + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for v in nice_ticks(x_lo, x_hi):
        if x_lo <= v <= x_hi:
            x = X(v)
            out.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.1f}" y="{mt + ph + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in nice_ticks(y_lo, y_hi):
        if y_lo <= v <= y_hi:
            y = Y(v)
            out.append(f'<line x1="{ml - 5}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="black"/>')
            out.append(f'<line x1="{ml}" y1="{y:.1f}" x2="{ml + pw}" y2="{y:.1f}" stroke="#e0e0e0"/>')
            out.append(f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end">{_fmt(v)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')

    legend = []
    if reference is not None:
        y = Y(reference[1])
        out.append(f'<line class="reference" x1="{ml}" y1="{y:.1f}" x2="{ml + pw}" y2="{y:.1f}" '
                   f'stroke="black" stroke-dasharray="6,4"/>')
        legend.append((reference[0], "black", "6,4"))
    for i, (label, x, y) in enumerate(curves):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size > max_points:
            idx = np.unique(np.linspace(0, x.size - 1, max_points).astype(int))
            x, y = x[idx], y[idx]
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'data-label="{escape(label)}" points="{pts}"/>')
        legend.append((label, color, None))

    lx, ly = ml + pw - 170, mt + ph - 12 - 18 * len(legend)
    out.append(f'<rect x="{lx - 8}" y="{ly - 14}" width="170" height="{18 * len(legend) + 8}" '
               f'fill="white" stroke="#999"/>')
    for j, (label, color, dash) in enumerate(legend):
        yy = ly + 18 * j
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{lx}" y1="{yy - 4}" x2="{lx + 24}" y2="{yy - 4}" stroke="{color}" '
                   f'stroke-width="2"{extra}/>')
        out.append(f'<text class="legend" x="{lx + 30}" y="{yy}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def result_chart(results, labels, title="", reference=None) -> str:
    curves = [(lab, r.slots, r.mean_avg_utility) for lab, r in zip(labels, results)]
    return line_chart(curves, title=title, xlabel="t",
                      ylabel="running average of expected utility", reference=reference)
