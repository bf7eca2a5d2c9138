"""Bare-bones SVG line plots so figures can be eyeballed without a plotting stack."""

from __future__ import annotations

import math

_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def line_plot(series: dict[str, tuple], title: str = "", xlabel: str = "", ylabel: str = "",
              log_y: bool = False, width: int = 480, height: int = 320, note: str = "") -> str:
    """``series`` maps a label to ``(xs, ys)``; returns the SVG document as text.

    ``note`` is embedded as an XML comment (e.g. the run's config hash).
    """
    pts = {k: [(float(x), float(y)) for x, y in zip(*v)] for k, v in series.items()}
    if log_y:
        pts = {k: [(x, math.log10(y)) for x, y in v if y > 0] for k, v in pts.items()}
    allp = [p for v in pts.values() for p in v]
    if not allp:
        raise ValueError("nothing to plot")
    x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
    y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    x1, y1 = (x1 if x1 > x0 else x0 + 1), (y1 if y1 > y0 else y0 + 1)
    m = 50

    def sx(x):
        return m + (x - x0) / (x1 - x0) * (width - 2 * m)

    def sy(y):
        return height - m - (y - y0) / (y1 - y0) * (height - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           *([f"<!-- {note} -->"] if note else []),
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle">{title}</text>',
           f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle">{xlabel}</text>',
           f'<text x="14" y="{height / 2:.1f}" transform="rotate(-90 14 {height / 2:.1f})" '
           f'text-anchor="middle">{("log10 " if log_y else "") + ylabel}</text>',
           f'<text x="{m - 4}" y="{height - m:.1f}" text-anchor="end">{y0:.3g}</text>',
           f'<text x="{m - 4}" y="{m + 4}" text-anchor="end">{y1:.3g}</text>',
           f'<text x="{m}" y="{height - m + 14}" text-anchor="middle">{x0:.3g}</text>',
           f'<text x="{width - m}" y="{height - m + 14}" text-anchor="middle">{x1:.3g}</text>']
    for n, (label, p) in enumerate(pts.items()):
        c = _COLOURS[n % len(_COLOURS)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{path}"/>')
        out.append(f'<text x="{width - m + 4}" y="{m + 12 * n}" fill="{c}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
