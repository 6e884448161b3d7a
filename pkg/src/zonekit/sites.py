"""Site specifications, their finite discretization, and system validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .norms import LpNorm, pairwise_distances
from .region import ConvexRegion

SITE_KINDS = ("points", "segment", "polyline", "ball_boundary", "ball")


class SiteValidationError(ValueError):
    """Raised by :func:`validate_system`; ``kind`` names the failure class."""

    def __init__(self, kind: str, message: str, indices=()):
        super().__init__(message)
        self.kind = kind
        self.indices = tuple(indices)


@dataclass(frozen=True)
class SiteSpec:
    kind: str
    points: tuple = ()
    center: tuple | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in SITE_KINDS:
            raise ValueError(f"unknown site type {self.kind!r}")
        if self.kind in ("ball", "ball_boundary"):
            if self.center is None or self.radius is None or not self.radius > 0:
                raise ValueError(f"{self.kind} site needs a center and a positive radius")
        elif not self.points:
            raise ValueError(f"{self.kind} site needs at least one point")
        elif self.kind == "segment" and len(self.points) != 2:
            raise ValueError("segment site needs exactly 2 points")

    @classmethod
    def from_points(cls, pts) -> "SiteSpec":
        return cls("points", tuple(tuple(map(float, q)) for q in pts))

    @classmethod
    def segment(cls, a, b) -> "SiteSpec":
        return cls("segment", (tuple(map(float, a)), tuple(map(float, b))))

    @classmethod
    def polyline(cls, pts) -> "SiteSpec":
        return cls("polyline", tuple(tuple(map(float, q)) for q in pts))

    @classmethod
    def ball_boundary(cls, center, radius) -> "SiteSpec":
        return cls("ball_boundary", center=tuple(map(float, center)), radius=float(radius))

    @classmethod
    def ball(cls, center, radius) -> "SiteSpec":
        return cls("ball", center=tuple(map(float, center)), radius=float(radius))

    def defining_points(self) -> np.ndarray:
        if self.kind in ("ball", "ball_boundary"):
            return np.array([self.center])
        return np.array(self.points, dtype=float)

    def to_dict(self) -> dict:
        if self.kind in ("ball", "ball_boundary"):
            return {"type": self.kind, "center": list(self.center), "radius": self.radius}
        if self.kind == "segment":
            return {"type": "segment", "a": list(self.points[0]), "b": list(self.points[1])}
        return {"type": self.kind, "points": [list(q) for q in self.points]}


def _pieces(length: float, m: int) -> int:
    # spacing length/n < 2/m; the slack keeps rounding from landing on 2/m exactly
    return int(math.floor(length * m / 2.0 * (1.0 + 1e-9))) + 1


def _sample_segment(a, b, m: int, norm: LpNorm, include_end=True) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = norm.distance(a, b)
    n = _pieces(length, m)
    s = np.linspace(0.0, 1.0, n + 1)
    if not include_end:
        s = s[:-1]
    return a + s[:, None] * (b - a)


def _unit_circle(norm: LpNorm, ang):
    v = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    return norm.unit(v)


def _sample_sphere(center, radius, m: int, norm: LpNorm) -> np.ndarray:
    """Boundary of the norm ball, resampled at equal arc length below 2/m."""
    dense = np.linspace(0.0, 2.0 * np.pi, 8193)
    curve = np.asarray(center) + radius * _unit_circle(norm, dense)
    seg = np.asarray(norm.norm(np.diff(curve, axis=0)))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = cum[-1]
    n = max(_pieces(perimeter, m), 4)
    targets = np.arange(n) * (perimeter / n)
    # interpolate along the dense polygon (angle is not linear in arc length),
    # then push back onto the sphere
    q = np.stack([np.interp(targets, cum, curve[:, 0]),
                  np.interp(targets, cum, curve[:, 1])], axis=1) - np.asarray(center)
    return np.asarray(center) + radius * norm.unit(q)


def discretize_site(spec: SiteSpec, m: int, norm: LpNorm) -> np.ndarray:
    """Finite subset of the site within Hausdorff distance < 1/m of it."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if spec.kind == "points":
        return np.array(spec.points, dtype=float)
    if spec.kind == "segment":
        return _sample_segment(spec.points[0], spec.points[1], m, norm)
    if spec.kind == "polyline":
        pts = np.array(spec.points, dtype=float)
        if len(pts) == 1:
            return pts
        parts = [_sample_segment(a, b, m, norm, include_end=False)
                 for a, b in zip(pts[:-1], pts[1:])]
        parts.append(pts[-1:])
        return np.concatenate(parts)
    c = np.asarray(spec.center, dtype=float)
    if spec.kind == "ball_boundary":
        return _sample_sphere(c, spec.radius, m, norm)
    # solid ball: interior grid plus a boundary ring at twice the density
    ring = _sample_sphere(c, spec.radius, 2 * m, norm)
    pitch = 0.5 / m
    k = int(math.ceil(spec.radius / pitch))
    g = np.arange(-k, k + 1) * pitch
    gx, gy = np.meshgrid(g, g)
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    grid = grid[np.asarray(norm.norm(grid)) < spec.radius] + c
    return np.concatenate([grid, ring])


def dense_reference(spec: SiteSpec, m: int, norm: LpNorm, factor: int = 100) -> np.ndarray:
    """A much finer sampling of the same site (for refinement checks)."""
    return discretize_site(spec, m * factor, norm)


@dataclass(frozen=True)
class SiteSystem:
    """Validated tuple of finite sites; never mutated after construction."""

    sites: tuple
    separation: float
    discretization_error: float
    m: int
    specs: tuple = field(default=(), repr=False)
    closest_pair: tuple = (0, 1)

    def __len__(self):
        return len(self.sites)

    def others(self, k: int) -> np.ndarray:
        return np.concatenate([s for j, s in enumerate(self.sites) if j != k])


def separation_matrix(sites, norm: LpNorm) -> np.ndarray:
    K = len(sites)
    D = np.full((K, K), np.inf)
    for j in range(K):
        for k in range(j + 1, K):
            D[j, k] = D[k, j] = pairwise_distances(sites[j], sites[k], norm).min()
    return D


def validate_system(specs, X: ConvexRegion, m: int, norm: LpNorm) -> SiteSystem:
    specs = list(specs)
    if len(specs) < 2:
        raise SiteValidationError("too_few_sites", "at least 2 sites required")
    for i, s in enumerate(specs):
        if not np.all(X.contains(s.defining_points())):
            raise SiteValidationError("outside_region", f"site {i} has a point outside X", (i,))
    sites = []
    for i, s in enumerate(specs):
        pts = discretize_site(s, m, norm)
        pts = pts[np.sort(np.unique(pts, axis=0, return_index=True)[1])]
        inside = X.contains(pts)
        if not np.all(inside):
            raise SiteValidationError("outside_region", f"site {i} has a point outside X", (i,))
        pts.setflags(write=False)
        sites.append(pts)
    D = separation_matrix(sites, norm)
    j, k = np.unravel_index(int(np.argmin(D)), D.shape)
    j, k = sorted((int(j), int(k)))
    r = float(D[j, k])
    if r == 0.0:
        raise SiteValidationError("not_disjoint", f"sites {j},{k} not disjoint", (j, k))
    if r <= 2.0 / m:
        raise SiteValidationError(
            "too_close",
            f"sites {j},{k} separated by {r:.6g} <= 2/m = {2.0 / m:.6g}; raise site_m",
            (j, k))
    return SiteSystem(tuple(sites), r, 1.0 / m, m, tuple(specs), (j, k))
