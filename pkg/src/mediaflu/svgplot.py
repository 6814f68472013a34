"""Minimal self-contained SVG charts (fixed 800x600 viewBox, no assets).

Emits deterministic markup so chart files can be diffed across runs.
Each dataset is (label, xs, ys) plus a draw mode of "line" or "markers".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 72
MARGIN_RIGHT = 170
MARGIN_TOP = 48
MARGIN_BOTTOM = 62

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#17becf", "#e377c2", "#bcbd22", "#7f7f7f")


@dataclass(frozen=True)
class Dataset:
    label: str
    xs: tuple
    ys: tuple
    mode: str = "line"  # or "markers"
    color: str | None = None

    def __post_init__(self):
        if self.mode not in ("line", "markers"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys must be equally long")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks or [lo, hi]


def _tick_label(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:.4g}"


def chart(
    datasets,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
) -> str:
    """Render datasets into one SVG document string."""
    sets = [d if isinstance(d, Dataset) else Dataset(*d) for d in datasets]
    xs_all = [x for d in sets for x in d.xs]
    ys_all = [y for d in sets for y in d.ys]
    if not xs_all:
        xs_all = [0.0, 1.0]
        ys_all = [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo = min(y_lo, 0.0) if y_lo >= 0.0 else y_lo - pad
    y_hi = y_hi + pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.0f}" y="28" text-anchor="middle" '
            f'font-family="sans-serif" font-size="18">{_escape(title)}</text>'
        )

    # axes
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    x1, y1 = MARGIN_LEFT + plot_w, MARGIN_TOP
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black" stroke-width="1"/>'
    )
    for t in _nice_ticks(x_lo, x_hi):
        if t < x_lo - 1e-12 or t > x_hi + 1e-12:
            continue
        x = px(t)
        parts.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{_fmt(x)}" y="{y0 + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{_tick_label(t)}</text>'
        )
    for t in _nice_ticks(y_lo, y_hi):
        if t < y_lo - 1e-12 or t > y_hi + 1e-12:
            continue
        y = py(t)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(y)}" x2="{x0}" y2="{_fmt(y)}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{_tick_label(t)}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.0f}" y="{HEIGHT - 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{_escape(x_label)}</text>'
        )
    if y_label:
        cx, cy = 20, MARGIN_TOP + plot_h / 2
        parts.append(
            f'<text x="{cx}" y="{cy:.0f}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="14" transform="rotate(-90 {cx} {cy:.0f})">{_escape(y_label)}</text>'
        )

    # data
    for i, d in enumerate(sets):
        color = d.color or PALETTE[i % len(PALETTE)]
        if d.mode == "line" and len(d.xs) >= 2:
            points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(d.xs, d.ys))
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>'
            )
        else:
            for x, y in zip(d.xs, d.ys):
                parts.append(
                    f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3.5" fill="{color}"/>'
                )

    # legend
    lx = MARGIN_LEFT + plot_w + 14
    ly = MARGIN_TOP + 10
    for i, d in enumerate(sets):
        color = d.color or PALETTE[i % len(PALETTE)]
        y = ly + 22 * i
        if d.mode == "line":
            parts.append(
                f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{color}" stroke-width="2"/>'
            )
        else:
            parts.append(f'<circle cx="{lx + 12}" cy="{y}" r="3.5" fill="{color}"/>')
        parts.append(
            f'<text x="{lx + 30}" y="{y + 4}" font-family="sans-serif" '
            f'font-size="12">{_escape(d.label)}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
