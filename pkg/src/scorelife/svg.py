"""Minimal native SVG polyline rendering for sampled curves."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def polyline_svg(
    xs: Sequence[float],
    ys: Sequence[float],
    path: str | Path,
    width: int = 720,
    height: int = 400,
    margin: int = 45,
    title: str = "",
) -> Path:
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two equal-length coordinate sequences")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    w, h = width - 2 * margin, height - 2 * margin

    def px(x):
        return margin + (x - x_lo) / x_span * w

    def py(y):
        return height - margin - (y - y_lo) / y_span * h

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{margin}" y="{margin - 12}" font-size="13">{title}</text>',
        f'<text x="{margin - 8}" y="{height - margin + 16}" font-size="11">{x_lo:.3g}</text>',
        f'<text x="{width - margin - 10}" y="{height - margin + 16}" font-size="11">{x_hi:.3g}</text>',
        f'<text x="4" y="{height - margin}" font-size="11">{y_lo:.3g}</text>',
        f'<text x="4" y="{margin + 4}" font-size="11">{y_hi:.3g}</text>',
        f'<polyline points="{pts}" fill="none" stroke="#1f5fbf" stroke-width="1"/>',
        "</svg>",
    ]
    out = Path(path)
    out.write_text("\n".join(parts) + "\n")
    return out
