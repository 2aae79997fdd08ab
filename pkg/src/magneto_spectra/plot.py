"""Static SVG line plots and gnuplot-compatible data files (no plotting dependency)."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["svg_lines", "write_gnuplot_data"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
W, H = 640, 420
ML, MR, MT, MB = 70, 20, 40, 50


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


def svg_lines(series: list[tuple[str, np.ndarray, np.ndarray, bool]], title: str,
              xlabel: str, ylabel: str, logx: bool = True) -> str:
    """SVG document with one polyline per ``(label, x, y, markers)`` entry.

    Non-finite points are dropped.  ``logx`` plots against ``log10 x``.
    """
    clean = []
    for label, x, y, markers in series:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y) & ((x > 0) if logx else True)
        if ok.any():
            clean.append((label, np.log10(x[ok]) if logx else x[ok], y[ok], markers))
    if not clean:
        raise ValueError("nothing to plot")
    xs = np.concatenate([c[1] for c in clean])
    ys = np.concatenate([c[2] for c in clean])
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    def px(v):
        return ML + (v - x0) / (x1 - x0) * (W - ML - MR)

    def py(v):
        return H - MB - (v - y0) / (y1 - y0) * (H - MT - MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{ML}" y1="{H - MB}" x2="{W - MR}" y2="{H - MB}" stroke="black"/>',
           f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H - MB}" stroke="black"/>']
    for v in _ticks(x0, x1):
        lab = f"{10**v:.4g}" if logx else f"{v:.4g}"
        out.append(f'<line x1="{px(v):.1f}" y1="{H - MB}" x2="{px(v):.1f}" y2="{H - MB + 5}" stroke="black"/>')
        out.append(f'<text x="{px(v):.1f}" y="{H - MB + 18}" text-anchor="middle">{lab}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{ML - 5}" y1="{py(v):.1f}" x2="{ML}" y2="{py(v):.1f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{py(v) + 4:.1f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{(ML + W - MR) / 2:.1f}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{(MT + H - MB) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {(MT + H - MB) / 2:.1f})">{escape(ylabel)}</text>')
    for i, (label, x, y, markers) in enumerate(clean):
        col = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        dash = "" if markers else ' stroke-dasharray="6,4"'
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"{dash}/>')
        if markers:
            out.extend(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="{col}"/>'
                       for a, b in zip(x, y))
        ly = MT + 10 + 16 * i
        out.append(f'<line x1="{W - MR - 150}" y1="{ly}" x2="{W - MR - 125}" y2="{ly}" '
                   f'stroke="{col}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{W - MR - 120}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_gnuplot_data(path, columns: dict) -> Path:
    """Whitespace-separated columns with a ``#`` header line."""
    path = Path(path)
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], float) for n in names])
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in data:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    return path
