"""Deterministic SVG output for Voronoi/zone states and oracle masks."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .dominance import GridMask
from .region import ConvexRegion

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


@dataclass(frozen=True)
class RenderSpec:
    canvas: int = 600
    palette: tuple = PALETTE
    site_radius: float = 3.0
    background: str = "#ffffff"
    stroke_width: float = 1.0
    label: str | None = None
    margin: int = 10

    def __post_init__(self):
        if self.canvas < 100:
            raise ValueError("canvas must be at least 100px")
        if not self.palette:
            raise ValueError("palette must not be empty")

    def color(self, k: int) -> str:
        return self.palette[k % len(self.palette)]


def _f(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Frame:
    """Maps region coordinates to canvas pixels (y up -> y down)."""

    def __init__(self, X: ConvexRegion, spec: RenderSpec):
        x0, y0, x1, y1 = X.bbox
        inner = spec.canvas - 2 * spec.margin
        self.scale = inner / max(x1 - x0, y1 - y0)
        self.x0, self.y1, self.m = x0, y1, spec.margin

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        u = self.m + (pts[:, 0] - self.x0) * self.scale
        v = self.m + (self.y1 - pts[:, 1]) * self.scale
        return np.stack([u, v], axis=1)


def _points_attr(uv) -> str:
    return " ".join(f"{_f(u)},{_f(v)}" for u, v in uv)


def _header(spec: RenderSpec) -> list[str]:
    c = spec.canvas
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" '
        f'viewBox="0 0 {c} {c}">',
        f'<rect x="0" y="0" width="{c}" height="{c}" fill="{spec.background}"/>',
    ]


def _footer(X: ConvexRegion, frame: _Frame, spec: RenderSpec) -> list[str]:
    out = [f'<polygon class="region" points="{_points_attr(frame(X.outline()))}" '
           f'fill="none" stroke="#000000" stroke-width="{_f(spec.stroke_width)}"/>']
    if spec.label:
        out.append(f'<text x="{spec.margin}" y="{spec.canvas - 2}" font-family="monospace" '
                   f'font-size="12">{escape(spec.label)}</text>')
    out.append("</svg>")
    return out


def render_state(S, sys, X: ConvexRegion, spec: RenderSpec | None = None) -> str:
    """One filled star polygon per anchor, coloured by site; sites drawn on top.

    Area left uncovered shows the background: the neutral zone.
    """
    spec = spec or RenderSpec()
    frame = _Frame(X, spec)
    lines = _header(spec)
    for k, cell in enumerate(S.cells):
        color = spec.color(k)
        lines.append(f'<g class="cell" data-site="{k}" fill="{color}" stroke="{color}" '
                     f'stroke-width="0.5">')
        for tips in cell.tips():
            lines.append(f'<polygon points="{_points_attr(frame(tips))}"/>')
        lines.append("</g>")
    for k, P in enumerate(sys.sites):
        lines.append(f'<g class="site" data-site="{k}" fill="#000000">')
        for u, v in frame(P):
            lines.append(f'<circle cx="{_f(u)}" cy="{_f(v)}" r="{_f(spec.site_radius)}"/>')
        lines.append("</g>")
    lines += _footer(X, frame, spec)
    return "\n".join(lines) + "\n"


def render_mask(mask: GridMask, X: ConvexRegion, spec: RenderSpec | None = None,
                color: str = "#2ca02c") -> str:
    """Oracle mask as SVG: one rect per horizontal run of set cells."""
    spec = spec or RenderSpec()
    frame = _Frame(X, spec)
    px, py = mask.pitch
    x0, y0 = mask.bbox[0], mask.bbox[1]
    lines = _header(spec)
    lines.append(f'<g class="mask" fill="{color}">')
    for row in range(mask.resolution):
        bits = mask.bits[row]
        if not bits.any():
            continue
        edges = np.flatnonzero(np.diff(np.concatenate([[0], bits.astype(np.int8), [0]])))
        for a, b in zip(edges[::2], edges[1::2]):
            (u0, v1), (u1, v0) = frame([[x0 + a * px, y0 + row * py],
                                        [x0 + b * px, y0 + (row + 1) * py]])
            lines.append(f'<rect x="{_f(u0)}" y="{_f(v0)}" width="{_f(u1 - u0)}" '
                         f'height="{_f(v1 - v0)}"/>')
    lines.append("</g>")
    lines += _footer(X, frame, spec)
    return "\n".join(lines) + "\n"


def frame_name(scene: str, mode: str, epoch: int) -> str:
    return f"{scene}_{mode}_{epoch:03d}.svg"
