"""Dominance regions as ray fans, the brute-force grid oracle, and Hausdorff distances.

A dominance region dom(P, A) is the union over anchors p in P and unit
directions theta of the segments [p, p + T(theta, p) theta], where the reach
T is the largest t with p + t theta in X and t <= d(p + t theta, A). The set
of admissible t along one ray is an interval starting at 0, so T is found by
bisection on [0, L(theta)].

Between sampled directions a fan is read as the star polygon through its
ray tips; membership, rasterization and distance queries all use that
reading.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .norms import LpNorm, set_distance
from .region import ConvexRegion, sample_directions

MAX_BISECT = 40
TIE_SLACK = 1e-12


class DominanceError(RuntimeError):
    """A contract violation inside the kernel (e.g. an anchor touching A)."""


def workers() -> int:
    env = os.environ.get("ZONEKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _kd_p(norm: LpNorm) -> float:
    return np.inf if norm.is_inf else norm.p


class PointSetDistance:
    """x -> d(x, A) for a finite set A, via a k-d tree under the active norm."""

    def __init__(self, points, norm: LpNorm):
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(self.points) == 0:
            raise ValueError("distance to an empty set")
        self.norm = norm
        self._tree = cKDTree(self.points)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d, _ = self._tree.query(x.reshape(-1, 2), k=1, p=_kd_p(self.norm), workers=workers())
        return float(d[0]) if x.ndim == 1 else d


# ---------------------------------------------------------------- reach


def reach_rays(starts, dirs, exits, dist_to_A, tol: float) -> np.ndarray:
    """Vectorized reach: one bisection per row of ``starts``/``dirs``.

    Returns the largest bracket point known to satisfy the predicate, so
    the predicate holds at the result and fails within ``tol`` above it.
    """
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 2)
    exits = np.asarray(exits, dtype=float).reshape(-1)
    n = len(starts)
    if n == 0:
        return np.zeros(0)

    def pred(idx, t):
        return t <= dist_to_A(starts[idx] + t[:, None] * dirs[idx])

    lo = np.zeros(n)
    hi = exits.copy()
    idx = np.flatnonzero(exits > 0)
    full = pred(idx, exits[idx])
    lo[idx[full]] = exits[idx[full]]
    active = idx[~full]
    half_tol = 0.5 * tol
    for _ in range(MAX_BISECT):
        active = active[hi[active] - lo[active] > half_tol]
        if len(active) == 0:
            break
        mid = 0.5 * (lo[active] + hi[active])
        ok = pred(active, mid)
        lo[active[ok]] = mid[ok]
        hi[active[~ok]] = mid[~ok]
    return lo


def reach(p, th, dist_to_A, X: ConvexRegion, tol: float) -> float:
    """T(theta, p) to within ``tol`` (see module docstring)."""
    p = np.asarray(p, dtype=float)
    th = np.asarray(th, dtype=float)
    if not X.contains(p):
        raise DominanceError(f"reach: anchor {p.tolist()} lies outside X")
    if float(np.atleast_1d(dist_to_A(p[None]))[0]) <= 0.0:
        raise DominanceError(f"reach: anchor {p.tolist()} touches the rival set")
    L = X.ray_exit(p, th)
    return float(reach_rays(p[None], th[None], [L], dist_to_A, tol)[0])


# ---------------------------------------------------------------- fans


@dataclass(eq=False)
class CellFan:
    """dom(P, A) as one radii table per anchor over a shared direction table."""

    anchors: np.ndarray
    radii: np.ndarray
    dirs: np.ndarray
    norm: LpNorm
    spacing: float
    exits: np.ndarray | None = field(default=None, repr=False)
    # (dist_to_A, X, tol) that produced the fan, for recomputation at other M
    source: tuple | None = field(default=None, repr=False)

    @property
    def direction_count(self) -> int:
        return len(self.dirs)

    def tips(self) -> np.ndarray:
        """``(anchors, M, 2)`` array of segment end points."""
        return self.anchors[:, None, :] + self.radii[:, :, None] * self.dirs[None, :, :]

    @cached_property
    def outline(self) -> np.ndarray:
        """Anchors plus the boundary of the union of star polygons, sampled at ``spacing``.

        Samples strictly inside another anchor's polygon are dropped; they
        cannot be nearest points for queries outside the fan. Multi-anchor
        outlines are thinned to one sample per half-spacing lattice cell.
        """
        tips = self.tips()
        nxt = np.roll(tips, -1, axis=1)
        seg = np.asarray(self.norm.norm(nxt - tips))
        counts = np.maximum(1, np.ceil(seg / self.spacing).astype(int)).ravel()
        start = tips.reshape(-1, 2)
        delta = (nxt - tips).reshape(-1, 2)
        rep = np.repeat(np.arange(len(start)), counts)
        offs = np.arange(len(rep)) - np.repeat(np.cumsum(counts) - counts, counts)
        frac = offs / np.repeat(counts, counts)
        pts = start[rep] + frac[:, None] * delta[rep]
        if len(self.anchors) > 1:
            owner = rep // self.direction_count
            buried = np.zeros(len(pts), dtype=bool)
            lo = tips.min(axis=1)
            hi = tips.max(axis=1)
            for i in range(len(self.anchors)):
                near = np.flatnonzero((owner != i) & ~buried
                                      & np.all((pts >= lo[i]) & (pts <= hi[i]), axis=1))
                if len(near):
                    buried[near] = self._star_contains(i, pts[near], strict=True)
            pts = pts[~buried]
            # anchors sharing a stretch of boundary (typically along the edge of X)
            # emit near-duplicate samples; keep one per half-spacing lattice cell
            key = np.floor(pts / (0.5 * self.spacing)).astype(np.int64)
            pts = pts[np.sort(np.unique(key, axis=0, return_index=True)[1])]
        pts = np.concatenate([self.anchors, pts])
        pts.setflags(write=False)
        return pts

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(self.outline)

    def _star_contains(self, i: int, pts, strict: bool = False) -> np.ndarray:
        """Membership of ``pts`` in anchor ``i``'s star polygon."""
        M = self.direction_count
        a, T = self.anchors[i], self.radii[i]
        v = pts - a
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2.0 * np.pi)
        k = np.minimum((ang * (M / (2.0 * np.pi))).astype(int), M - 1)
        j = (k + 1) % M
        tk = T[k][:, None] * self.dirs[k]
        tj = T[j][:, None] * self.dirs[j]
        e = tj - tk
        w = v - tk
        cross = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
        scale = max(1.0, float(T.max(initial=0.0)))
        if strict:
            # clear of the polygon's boundary, so shared boundary samples survive
            return (np.maximum(T[k], T[j]) > 0) & (cross > 1e-9 * scale * scale)
        at_anchor = (v[:, 0] == 0) & (v[:, 1] == 0)
        return at_anchor | ((np.maximum(T[k], T[j]) > 0) & (cross >= -1e-12 * scale * scale))

    def contains(self, x) -> np.ndarray:
        """Membership in the union of the anchors' star polygons."""
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, 2)
        inside = np.zeros(len(pts), dtype=bool)
        for i in range(len(self.anchors)):
            todo = np.flatnonzero(~inside)
            if len(todo) == 0:
                break
            inside[todo[self._star_contains(i, pts[todo])]] = True
        return inside.reshape(x.shape[:-1]) if x.ndim > 1 else bool(inside[0])

    def outline_distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        d, _ = self._tree.query(x, k=1, p=_kd_p(self.norm), workers=workers())
        return d

    def distance(self, x):
        """d(x, fan): zero inside, else distance to the sampled outline."""
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, 2)
        out = np.zeros(len(pts))
        outside = ~np.asarray(self.contains(pts), dtype=bool).reshape(-1)
        if outside.any():
            out[outside] = self.outline_distance(pts[outside])
        return float(out[0]) if x.ndim == 1 else out

    def point_cloud(self, h: float | None = None) -> np.ndarray:
        return fan_point_cloud(self, self.spacing if h is None else h)

    def to_dict(self, directions_ref: str = "directions") -> list[dict]:
        return [{"anchor": [float(a[0]), float(a[1])], "directions_ref": directions_ref,
                 "radii": [round(float(t), 9) for t in T]}
                for a, T in zip(self.anchors, self.radii)]


def fan_point_cloud(f: CellFan, h: float) -> np.ndarray:
    """Points p + t theta for t = 0, h, 2h, ..., T (T always included)."""
    if not h > 0:
        raise ValueError("h must be positive")
    T = f.radii.ravel()
    k = np.floor(T / h).astype(int)
    has_end = T - k * h > 1e-12 * max(1.0, float(T.max(initial=0.0)))
    counts = k + 1 + has_end
    rep = np.repeat(np.arange(len(T)), counts)
    offs = np.arange(len(rep)) - np.repeat(np.cumsum(counts) - counts, counts)
    t = np.minimum(offs * h, T[rep])
    M = f.direction_count
    anchor = f.anchors[rep // M]
    d = f.dirs[rep % M]
    pts = anchor + t[:, None] * d
    # each ray re-emits its anchor at t = 0; keep one copy per anchor
    zero = offs == 0
    keep = ~zero
    keep[np.flatnonzero(zero)[rep[zero] % M == 0]] = True
    return pts[keep]


def dom_fan(P, dist_to_A, X: ConvexRegion, M: int, tol: float, h: float | None = None,
            dirs=None) -> CellFan:
    """dom(P, A) within X as a ray fan with ``M`` directions per anchor."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    norm = X.norm
    if dirs is None:
        dirs = sample_directions(norm, M)
    if h is None:
        h = X.diameter / 1000.0
    d0 = np.atleast_1d(dist_to_A(P))
    bad = np.flatnonzero(d0 <= 0.0)
    if len(bad):
        raise DominanceError(f"anchor {P[bad[0]].tolist()} has zero distance to the rival set")
    exits = X.ray_exit_many(P, dirs)
    A, Md = exits.shape
    starts = np.repeat(P, Md, axis=0)
    rdirs = np.tile(dirs, (A, 1))
    radii = reach_rays(starts, rdirs, exits.ravel(), dist_to_A, tol).reshape(A, Md)
    return CellFan(P.copy(), radii, dirs, norm, float(h), exits, (dist_to_A, X, tol))


# ---------------------------------------------------------------- grid oracle


@dataclass
class GridMask:
    """``n x n`` membership table over the bounding box; ``bits[row, col]``, rows bottom-up."""

    resolution: int
    bbox: tuple
    bits: np.ndarray

    @property
    def pitch(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0) / self.resolution, (y1 - y0) / self.resolution

    def centers(self) -> np.ndarray:
        return grid_centers(self.bbox, self.resolution)

    def to_pgm(self) -> bytes:
        n = self.resolution
        img = np.where(self.bits[::-1], 0, 255).astype(np.uint8)
        return f"P5\n{n} {n}\n255\n".encode("ascii") + img.tobytes()

    def boundary(self) -> np.ndarray:
        """Cells whose 4-neighbourhood (or the grid edge) leaves the mask."""
        b = self.bits
        pad = np.pad(b, 1, constant_values=False)
        interior = pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
        return b & ~interior


def grid_centers(bbox, n: int) -> np.ndarray:
    x0, y0, x1, y1 = bbox
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx, gy], axis=-1)


def dom_grid_oracle(P, A, X: ConvexRegion, n: int) -> GridMask:
    """Brute force: cell is set iff its center c is in X and d(c,P) <= d(c,A)."""
    c = grid_centers(X.bbox, n).reshape(-1, 2)
    inX = np.asarray(X.contains(c), dtype=bool)
    dP = set_distance(c, P, X.norm)
    dA = set_distance(c, A, X.norm)
    bits = inX & (dP <= dA + TIE_SLACK)
    return GridMask(n, X.bbox, bits.reshape(n, n))


def rasterize_fan(f: CellFan, X: ConvexRegion, n: int) -> GridMask:
    c = grid_centers(X.bbox, n).reshape(-1, 2)
    inX = np.asarray(X.contains(c), dtype=bool)
    bits = np.zeros(len(c), dtype=bool)
    bits[inX] = f.contains(c[inX])
    return GridMask(n, X.bbox, bits.reshape(n, n))


# ---------------------------------------------------------------- distances


def dist_to_fan(x, f: CellFan, norm: LpNorm | None = None):
    if norm is not None and norm != f.norm:
        raise ValueError("fan was built under a different norm")
    return f.distance(x)


class FanSetDistance:
    """x -> min over fans of d(x, fan), evaluated on the fans' outlines.

    Outside every fan this is the set distance. A query point p + t theta
    inside a rival fan gets a positive value, but one below t, because the
    segment back to p crosses that fan's outline; the reach predicate
    therefore fails there exactly as it does for the true distance 0.
    """

    def __init__(self, fans, norm: LpNorm):
        fans = list(fans)
        if not fans:
            raise ValueError("distance to an empty union of fans")
        self.fans = fans
        self.norm = norm
        self._tree = cKDTree(np.concatenate([f.outline for f in fans]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d, _ = self._tree.query(x.reshape(-1, 2), k=1, p=_kd_p(self.norm), workers=workers())
        return float(d[0]) if x.ndim == 1 else d

    def exact(self, x):
        return np.min([np.atleast_1d(f.distance(x)) for f in self.fans], axis=0)


def directed_hausdorff(A, B, norm: LpNorm) -> float:
    """sup over a in A of d(a, B)."""
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("hausdorff: point clouds must be nonempty")
    d, _ = cKDTree(B).query(A, k=1, p=_kd_p(norm), workers=workers())
    return float(d.max())


def hausdorff(A, B, norm: LpNorm) -> float:
    return max(directed_hausdorff(A, B, norm), directed_hausdorff(B, A, norm))


def fan_excess(A: CellFan, B: CellFan) -> float:
    """One-sided excess sup_{a in A} d(a, B), sampled on A's outline."""
    return float(np.max(B.distance(A.outline)))


def fan_hausdorff(A: CellFan, B: CellFan) -> float:
    return max(fan_excess(A, B), fan_excess(B, A))


def max_adjacent_jump(f: CellFan) -> float:
    """Largest |T(theta_{i+1}) - T(theta_i)| over neighbours that both enter X."""
    d = np.abs(np.roll(f.radii, -1, axis=1) - f.radii)
    if f.exits is not None:
        d = np.where((f.exits > 0) & (np.roll(f.exits, -1, axis=1) > 0), d, 0.0)
    return float(d.max(initial=0.0))


def default_tol(X: ConvexRegion) -> float:
    return 1e-6 * X.diameter


def default_spacing(X: ConvexRegion) -> float:
    return X.diameter / 1000.0

