"""Minimal SVG 1.1 scatter writer (no plotting dependencies)."""

from __future__ import annotations

import numpy as np

_COLORS = ("#1f6fb4", "#d0483e", "#3a9b52", "#8a5bb8", "#c78f2e", "#3aa6a6")


def scatter_svg(path, series, title="", xlabel="", ylabel="",
                width=640, height=480):
    """Write a scatter plot.

    ``series`` is a list of dicts with keys ``x``, ``y`` (sequences),
    ``label``, and optional ``marker`` ("circle" or "cross").
    """
    pad = 56
    xs = np.concatenate([np.asarray(s["x"], float) for s in series]) \
        if series else np.array([0.0, 1.0])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series]) \
        if series else np.array([0.0, 1.0])
    if len(xs) == 0:
        xs, ys = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    x0, x1 = x0 - 0.08 * dx, x1 + 0.08 * dx
    y0, y1 = y0 - 0.08 * dy, y1 + 0.08 * dy

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="#444"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(f'<text x="{sx(xv):.1f}" y="{height - pad + 16}" '
                     f'font-size="10" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{pad - 6}" y="{sy(yv):.1f}" font-size="10" '
                     f'text-anchor="end">{yv:.3g}</text>')
    if title:
        parts.append(f'<text x="{width / 2}" y="24" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{width / 2}" y="{height - 12}" font-size="12" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{height / 2}" font-size="12" '
                     f'text-anchor="middle" '
                     f'transform="rotate(-90 16 {height / 2})">{ylabel}</text>')
    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        marker = s.get("marker", "circle")
        for x, y in zip(s["x"], s["y"]):
            cx, cy = sx(float(x)), sy(float(y))
            if marker == "cross":
                parts.append(f'<path d="M {cx - 4} {cy - 4} L {cx + 4} {cy + 4} '
                             f'M {cx - 4} {cy + 4} L {cx + 4} {cy - 4}" '
                             f'stroke="{color}" stroke-width="1.5"/>')
            else:
                parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="3.5" '
                             f'fill="{color}" fill-opacity="0.85"/>')
        label = s.get("label")
        if label:
            ly = pad + 16 + 14 * i
            parts.append(f'<circle cx="{width - pad - 90}" cy="{ly - 4}" r="3.5" '
                         f'fill="{color}"/>')
            parts.append(f'<text x="{width - pad - 80}" y="{ly}" '
                         f'font-size="11">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
