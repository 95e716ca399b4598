"""Minimal deterministic SVG line plots.

Hand-rolled instead of pulling in a plotting stack because the contract is
byte determinism: the output must be a pure function of the input data, with
no timestamps, random ids, or library-version drift.  Only simple line plots
with axes, ticks, labels, and a legend are needed.
"""

import json
import math
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

WIDTH = 720
HEIGHT = 480
MARGIN_LEFT = 78
MARGIN_RIGHT = 24
MARGIN_TOP = 44
MARGIN_BOTTOM = 58

PALETTE = ("#1f6fb4", "#d9590a", "#2a9d3a", "#7a5195")


def _nice_step(span: float, target: int) -> float:
    if span <= 0:
        return 1.0
    raw = span / max(target, 1)
    power = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * power:
            return mult * power
    return 10.0 * power


def _ticks(lo: float, hi: float, target: int = 6) -> List[float]:
    step = _nice_step(hi - lo, target)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + step * 1e-9:
        ticks.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return format(v, ".6g")


def line_plot(series: Sequence[Tuple[Sequence[float], Sequence[float], str]],
              title: str, xlabel: str, ylabel: str,
              meta: Optional[dict] = None) -> str:
    """Render line series into standalone SVG text.

    ``series`` is a list of (x values, y values, label); the metadata dict is
    echoed as an XML comment so the plot records what produced it.
    """
    if not series:
        raise ValueError("plot needs at least one series")
    xs_all = [float(x) for xs, _, _ in series for x in xs]
    ys_all = [float(y) for _, ys, _ in series for y in ys]
    if not xs_all:
        raise ValueError("plot needs at least one point")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_pad = 0.04 * (x_hi - x_lo)
    y_pad = 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    if meta is not None:
        comment = json.dumps(meta, sort_keys=True).replace("--", "- -")
        out.append(f"<!-- meta {comment} -->")
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    out.append(
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{escape(title)}</text>')

    for tick in _ticks(x_lo + x_pad, x_hi - x_pad):
        x = px(tick)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN_TOP}" x2="{x:.2f}" '
                   f'y2="{HEIGHT - MARGIN_BOTTOM}" stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN_BOTTOM + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_fmt(tick)}</text>')
    for tick in _ticks(y_lo + y_pad, y_hi - y_pad):
        y = py(tick)
        out.append(f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" '
                   f'x2="{WIDTH - MARGIN_RIGHT}" y2="{y:.2f}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{_fmt(tick)}</text>')

    frame = (f'M {MARGIN_LEFT} {MARGIN_TOP} H {WIDTH - MARGIN_RIGHT} '
             f'V {HEIGHT - MARGIN_BOTTOM} H {MARGIN_LEFT} Z')
    out.append(f'<path d="{frame}" fill="none" stroke="#333333" stroke-width="1"/>')

    for idx, (xs, ys, _) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        points = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}"
                          for x, y in zip(xs, ys))
        out.append(f'<polyline points="{points}" fill="none" '
                   f'stroke="{color}" stroke-width="1.6"/>')

    legend_x = WIDTH - MARGIN_RIGHT - 170
    legend_y = MARGIN_TOP + 12
    for idx, (_, _, label) in enumerate(series):
        if not label:
            continue
        color = PALETTE[idx % len(PALETTE)]
        y = legend_y + 18 * idx
        out.append(f'<line x1="{legend_x}" y1="{y - 4}" x2="{legend_x + 26}" '
                   f'y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{legend_x + 32}" y="{y}" font-family="sans-serif" '
                   f'font-size="12">{escape(label)}</text>')

    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 14}" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'font-size="13">{escape(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {MARGIN_TOP + plot_h / 2:.1f})">'
        f'{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
