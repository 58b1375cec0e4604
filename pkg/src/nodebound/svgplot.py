"""Minimal SVG figures from line/rect/circle primitives; no external renderer."""

from __future__ import annotations

import math

_WIDTH, _HEIGHT = 640, 440
_MARGIN = 60


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 16}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="18" y="{_HEIGHT // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {_HEIGHT // 2})">{ylabel}</text>',
    ]


def _ticks(lo, hi, horizontal: bool) -> list[str]:
    parts = []
    for frac in (0.0, 0.5, 1.0):
        val = lo + frac * (hi - lo)
        label = f"{val:.4g}"
        if horizontal:
            x = _MARGIN + frac * (_WIDTH - 2 * _MARGIN)
            parts.append(f'<text x="{x:.1f}" y="{_HEIGHT - _MARGIN + 18}" '
                         f'text-anchor="middle" font-size="11">{label}</text>')
        else:
            y = _HEIGHT - _MARGIN - frac * (_HEIGHT - 2 * _MARGIN)
            parts.append(f'<text x="{_MARGIN - 8}" y="{y:.1f}" '
                         f'text-anchor="end" font-size="11">{label}</text>')
    return parts


def scatter_svg(xs, ys, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equal-length non-empty series")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    px = _scale(xs, x_lo, x_hi, _MARGIN, _WIDTH - _MARGIN)
    py = _scale(ys, y_lo, y_hi, _HEIGHT - _MARGIN, _MARGIN)
    parts = _frame(title, xlabel, ylabel)
    parts += _ticks(x_lo, x_hi, True) + _ticks(y_lo, y_hi, False)
    for x, y in zip(px, py):
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def box_svg(groups: dict, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """One box per group; each value is a dict with min/q1/median/q3/max."""
    if not groups:
        raise ValueError("need at least one group")
    labels = list(groups)
    lo = min(g["min"] for g in groups.values())
    hi = max(g["max"] for g in groups.values())
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise ValueError("box statistics must be finite")

    def y_of(v):
        span = hi - lo if hi > lo else 1.0
        return _HEIGHT - _MARGIN - (v - lo) / span * (_HEIGHT - 2 * _MARGIN)

    slot = (_WIDTH - 2 * _MARGIN) / len(labels)
    parts = _frame(title, xlabel, ylabel)
    parts += _ticks(lo, hi, False)
    for i, label in enumerate(labels):
        g = groups[label]
        cx = _MARGIN + (i + 0.5) * slot
        half = min(28.0, slot * 0.3)
        parts.append(f'<line x1="{cx:.1f}" y1="{y_of(g["min"]):.1f}" x2="{cx:.1f}" '
                     f'y2="{y_of(g["max"]):.1f}" stroke="black"/>')
        top, bottom = y_of(g["q3"]), y_of(g["q1"])
        parts.append(f'<rect x="{cx - half:.1f}" y="{top:.1f}" width="{2 * half:.1f}" '
                     f'height="{max(bottom - top, 0.5):.1f}" fill="lightsteelblue" stroke="black"/>')
        parts.append(f'<line x1="{cx - half:.1f}" y1="{y_of(g["median"]):.1f}" '
                     f'x2="{cx + half:.1f}" y2="{y_of(g["median"]):.1f}" stroke="black"/>')
        parts.append(f'<text x="{cx:.1f}" y="{_HEIGHT - _MARGIN + 18}" '
                     f'text-anchor="middle" font-size="11">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
