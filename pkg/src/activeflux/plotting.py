"""Static SVG line plots with no plotting dependency.

Output is a fixed 960x540 viewport with linear axes, one polyline per
series and a legend. Formatting is deterministic so identical data gives
identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 960, 540
COLORS = ("#000000", "#e66100", "#1b7fd1", "#2ca02c", "#9467bd", "#8c564b", "#d62728")

Series = tuple[str, Sequence[float], Sequence[float]]


def _limits(values: np.ndarray) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return 0.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        pad = max(abs(hi) * 0.05, 0.05)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _panel(series: Sequence[Series], box: tuple[float, float, float, float], title: str,
           xlabel: str, ylabel: str, legend: bool) -> list[str]:
    left, top, width, height = box
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x0, x1 = _limits(xs)
    y0, y1 = _limits(ys)

    def px(x):
        return left + (x - x0) / (x1 - x0) * width

    def py(y):
        return top + height - (y - y0) / (y1 - y0) * height

    out = [
        f'<rect x="{left:.1f}" y="{top:.1f}" width="{width:.1f}" height="{height:.1f}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
        f'<text x="{left + width / 2:.1f}" y="{top - 8:.1f}" text-anchor="middle" '
        f'font-size="14">{escape(title)}</text>',
        f'<text x="{left + width / 2:.1f}" y="{top + height + 34:.1f}" text-anchor="middle" '
        f'font-size="12">{escape(xlabel)}</text>',
        f'<text x="{left - 44:.1f}" y="{top + height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 {left - 44:.1f} {top + height / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        out.append(f'<text x="{px(xv):.1f}" y="{top + height + 16:.1f}" text-anchor="middle" '
                   f'font-size="10">{xv:.3g}</text>')
        out.append(f'<text x="{left - 6:.1f}" y="{py(yv) + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{yv:.4g}</text>')
    for k, (label, x, y) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(
            f"{px(a):.2f},{py(b):.2f}"
            for a, b in zip(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
            if math.isfinite(a) and math.isfinite(b)
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if legend:
            ly = top + 14 + 16 * k
            out.append(f'<line x1="{left + 10:.1f}" y1="{ly:.1f}" x2="{left + 34:.1f}" y2="{ly:.1f}" '
                       f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{left + 40:.1f}" y="{ly + 4:.1f}" font-size="11">{escape(label)}</text>')
    return out


def _document(body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>"]) + "\n"


def write_line_plot(path: Path | str, series: Sequence[Series], title: str = "",
                    xlabel: str = "", ylabel: str = "") -> None:
    body = _panel(series, (80, 40, WIDTH - 120, HEIGHT - 100), title, xlabel, ylabel, legend=True)
    Path(path).write_text(_document(body))


def write_panels(path: Path | str, panels: Sequence[tuple[str, Sequence[Series]]],
                 xlabel: str = "", ylabel: str = "") -> None:
    """One panel per entry laid out on a grid of at most three columns."""
    n = len(panels)
    cols = min(3, n)
    rows = math.ceil(n / cols)
    cell_w, cell_h = WIDTH / cols, HEIGHT / rows
    body: list[str] = []
    for k, (title, series) in enumerate(panels):
        r, c = divmod(k, cols)
        box = (c * cell_w + 60, r * cell_h + 28, cell_w - 80, cell_h - 72)
        body += _panel(series, box, title, xlabel, ylabel, legend=(k == 0))
    Path(path).write_text(_document(body))
