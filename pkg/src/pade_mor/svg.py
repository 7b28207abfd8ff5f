"""Tiny SVG line plots with a logarithmic y axis. Cosmetic only."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def line_plot(path, series, title="", xlabel="", ylabel="", width=640, height=420):
    """``series`` maps a label to ``(xs, ys)``; non-positive or non-finite ys are skipped."""
    pts = {
        k: [(x, y) for x, y in zip(xs, ys) if math.isfinite(y) and y > 0]
        for k, (xs, ys) in series.items()
    }
    allp = [p for v in pts.values() for p in v]
    left, right, top, bottom = 70, 20, 40, 50
    if not allp:
        allp = [(0.0, 1.0), (1.0, 10.0)]
    x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
    ly = [math.log10(p[1]) for p in allp]
    y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def sy(y):
        return top + (y1 - math.log10(y)) / (y1 - y0) * (height - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{height / 2}" text-anchor="middle" transform="rotate(-90 15 {height / 2})">{escape(ylabel)}</text>',
    ]
    step = max(1, (y1 - y0) // 8)
    for e in range(y0, y1 + 1, step):
        y = sy(10.0**e)
        out.append(f'<line x1="{left}" x2="{width - right}" y1="{y:.1f}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 5}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    for k in range(6):
        x = x0 + k * (x1 - x0) / 5
        out.append(f'<text x="{sx(x):.1f}" y="{height - bottom + 18}" text-anchor="middle">{x:.4g}</text>')
    out.append(
        f'<rect x="{left}" y="{top}" width="{width - left - right}" height="{height - top - bottom}" fill="none" stroke="black"/>'
    )
    for i, (label, p) in enumerate(pts.items()):
        c = COLORS[i % len(COLORS)]
        if p:
            d = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
            out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{d}"/>')
        ly_ = top + 15 + 15 * i
        out.append(f'<line x1="{width - right - 120}" x2="{width - right - 100}" y1="{ly_}" y2="{ly_}" stroke="{c}" stroke-width="2"/>')
        out.append(f'<text x="{width - right - 95}" y="{ly_ + 4}">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
