"""Minimal deterministic SVG line charts (no rendering backend)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH = 760
HEIGHT = 380
MARGIN_LEFT = 70
MARGIN_RIGHT = 150
MARGIN_TOP = 40
MARGIN_BOTTOM = 50


@dataclass(frozen=True)
class Line:
    label: str
    color: str
    values: Sequence[float]


def nice_ceiling(v: float) -> float:
    """Smallest 1, 2 or 5 times a power of ten that is >= v."""
    if v <= 0:
        return 1.0
    exp = math.floor(math.log10(v))
    for m in (1, 2, 5, 10):
        c = m * 10 ** exp
        if c >= v * (1 - 1e-12):
            return float(c)
    return float(10 ** (exp + 1))


def _num(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _tick_label(v: float) -> str:
    return f"{v:g}"


def line_chart(
    lines: Sequence[Line],
    *,
    title: str,
    x_label: str,
    y_label: str,
    x_tick_labels: Sequence[str] | None = None,
    gridlines_every: int | None = None,
) -> str:
    """Render lines sharing an x axis of equally spaced points as an SVG document."""
    n = max(len(line.values) for line in lines)
    lo = min(0.0, min((min(line.values) for line in lines if len(line.values)), default=0.0))
    hi = max(0.0, max((max(line.values) for line in lines if len(line.values)), default=0.0))
    top = nice_ceiling(hi) if hi > 0 else (0.0 if lo < 0 else 1.0)
    bottom = -nice_ceiling(-lo) if lo < 0 else 0.0

    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    upper, lower = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM

    def px(i: int) -> float:
        return left + (right - left) * (i / (n - 1) if n > 1 else 0.5)

    def py(v: float) -> float:
        return lower - (lower - upper) * (v - bottom) / (top - bottom)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]
    # horizontal ticks
    for k in range(5):
        v = bottom + (top - bottom) * k / 4
        y = py(v)
        out.append(f'<line x1="{left}" y1="{_num(y)}" x2="{right}" y2="{_num(y)}" stroke="#e5e5e5" stroke-width="1"/>')
        out.append(f'<text x="{left - 6}" y="{_num(y + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(v)}</text>')
    if gridlines_every:
        for i in range(gridlines_every, n, gridlines_every):
            x = (px(i - 1) + px(i)) / 2
            out.append(f'<line class="grid" x1="{_num(x)}" y1="{upper}" x2="{_num(x)}" y2="{lower}" stroke="#bbbbbb" '
                       f'stroke-dasharray="4 3" stroke-width="1"/>')
    if x_tick_labels:
        step = max(1, len(x_tick_labels) // 12)
        for i in range(0, len(x_tick_labels), step):
            out.append(f'<text x="{_num(px(i))}" y="{lower + 16}" text-anchor="middle" font-family="sans-serif" '
                       f'font-size="11">{escape(str(x_tick_labels[i]))}</text>')
    out.append(f'<line x1="{left}" y1="{lower}" x2="{right}" y2="{lower}" stroke="#333333" stroke-width="1"/>')
    out.append(f'<line x1="{left}" y1="{upper}" x2="{left}" y2="{lower}" stroke="#333333" stroke-width="1"/>')
    if bottom < 0:
        out.append(f'<line x1="{left}" y1="{_num(py(0))}" x2="{right}" y2="{_num(py(0))}" stroke="#333333" '
                   f'stroke-width="1"/>')
    out.append(f'<text x="{(left + right) / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">{escape(x_label)}</text>')
    out.append(f'<text x="16" y="{(upper + lower) / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 16 {(upper + lower) / 2:.0f})">{escape(y_label)}</text>')

    for line in lines:
        pts = " ".join(f"{_num(px(i))},{_num(py(float(v)))}" for i, v in enumerate(line.values))
        out.append(f'<polyline data-label="{escape(line.label)}" points="{pts}" fill="none" stroke="{line.color}" '
                   f'stroke-width="2"/>')
    for k, line in enumerate(lines):
        y = upper + 10 + 20 * k
        out.append(f'<line x1="{right + 15}" y1="{y}" x2="{right + 40}" y2="{y}" stroke="{line.color}" '
                   f'stroke-width="3"/>')
        out.append(f'<text x="{right + 46}" y="{y + 4}" font-family="sans-serif" font-size="12">'
                   f'{escape(line.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
