"""Compact convex regions X: membership, ray exits, direction tables, emanation scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .norms import LpNorm, pairwise_distances

CONTAIN_TOL = 1e-9
BISECT_TOL = 1e-10


class RegionError(ValueError):
    pass


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class ConvexRegion:
    """A convex polygon or an l_p ball.

    ``kind`` is ``"polygon"`` (``vertices``) or ``"ball"`` (``center``,
    ``radius``); the ball is measured in ``norm``, as is ``diameter``.
    """

    kind: str
    norm: LpNorm
    vertices: np.ndarray | None = None
    center: tuple[float, float] | None = None
    radius: float | None = None
    _halfplanes: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def polygon(cls, vertices, norm: LpNorm) -> "ConvexRegion":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise RegionError("polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise RegionError("polygon vertices must be finite")
        e = np.roll(v, -1, axis=0) - v
        turn = _cross(e, np.roll(e, -1, axis=0))
        scale = max(1.0, float(np.abs(v).max()))
        if np.any(turn <= 1e-12 * scale * scale):
            raise RegionError(
                "polygon vertices must be counterclockwise and strictly convex")
        v.setflags(write=False)
        return cls("polygon", norm, vertices=v, _halfplanes=cls._make_halfplanes(v))

    @classmethod
    def square(cls, lo: float, hi: float, norm: LpNorm) -> "ConvexRegion":
        return cls.polygon([[lo, lo], [hi, lo], [hi, hi], [lo, hi]], norm)

    @classmethod
    def ball(cls, center, radius: float, norm: LpNorm) -> "ConvexRegion":
        c = tuple(float(t) for t in center)
        if not radius > 0 or not math.isfinite(radius):
            raise RegionError("ball radius must be positive")
        hp = None
        if norm.p == 1.0:
            r = float(radius)
            hp = cls._make_halfplanes(np.array(c) + [[r, 0], [0, r], [-r, 0], [0, -r]])
        elif norm.is_inf:
            r = float(radius)
            hp = cls._make_halfplanes(np.array(c) + [[r, -r], [r, r], [-r, r], [-r, -r]])
        return cls("ball", norm, center=c, radius=float(radius), _halfplanes=hp)

    @staticmethod
    def _make_halfplanes(v):
        v = np.asarray(v, dtype=float)
        e = np.roll(v, -1, axis=0) - v
        normals = np.stack([e[:, 1], -e[:, 0]], axis=1)  # outward for CCW order
        normals /= np.hypot(normals[:, 0], normals[:, 1])[:, None]
        offsets = np.einsum("ij,ij->i", normals, v)
        return normals, offsets

    @cached_property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return float(pairwise_distances(self.vertices, self.vertices, self.norm).max())

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        if self.kind == "polygon":
            lo = self.vertices.min(axis=0)
            hi = self.vertices.max(axis=0)
            return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])
        cx, cy = self.center
        r = self.radius
        return cx - r, cy - r, cx + r, cy + r

    def outline(self, samples: int = 256) -> np.ndarray:
        """Boundary polygon (exact for polygons, sampled for curved balls)."""
        if self.kind == "polygon":
            return np.array(self.vertices)
        dirs = sample_directions(self.norm, samples)
        return np.asarray(self.center) + self.radius * dirs

    def contains(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        if self._halfplanes is not None:
            normals, offsets = self._halfplanes
            inside = np.all((x.reshape(-1, 2) @ normals.T) <= offsets + CONTAIN_TOL,
                            axis=1).reshape(x.shape[:-1])
        else:
            d = self.norm.norm(x - np.asarray(self.center))
            inside = np.asarray(d <= self.radius + CONTAIN_TOL)
        return bool(inside) if inside.ndim == 0 else inside

    def project(self, x) -> np.ndarray:
        """A point of X near ``x``; the identity on X.

        Polygons use the Euclidean nearest point, balls radial scaling.
        """
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, 2).copy()
        out = self.contains(pts)
        bad = ~np.asarray(out, dtype=bool).reshape(-1)
        if bad.any():
            if self.kind == "ball" and self._halfplanes is None:
                c = np.asarray(self.center)
                v = pts[bad] - c
                pts[bad] = c + v * (self.radius / np.asarray(self.norm.norm(v)))[:, None]
            else:
                pts[bad] = np.array([_nearest_on_polygon(q, self._polygon_vertices())
                                     for q in pts[bad]])
        return pts.reshape(x.shape)

    def _polygon_vertices(self):
        if self.kind == "polygon":
            return self.vertices
        return self.outline(4)

    def ray_exit(self, p, dirs) -> np.ndarray | float:
        """L(theta) = sup{t >= 0 : p + t*theta in X} for one or many directions."""
        p = np.asarray(p, dtype=float)
        if not self.contains(p):
            raise RegionError(f"ray_exit: point {p.tolist()} lies outside X")
        d = np.asarray(dirs, dtype=float)
        single = d.ndim == 1
        d = d.reshape(-1, 2)
        if self._halfplanes is not None:
            out = self._exit_halfplanes(p, d)
        elif self.norm.p == 2.0:
            out = self._exit_euclidean_ball(p, d)
        else:
            out = self._exit_bisect(p, d)
        return float(out[0]) if single else out

    def ray_exit_many(self, anchors, dirs) -> np.ndarray:
        """``len(anchors) x len(dirs)`` table of exit lengths."""
        anchors = np.asarray(anchors, dtype=float).reshape(-1, 2)
        return np.stack([self.ray_exit(a, dirs) for a in anchors]) if len(anchors) else \
            np.zeros((0, len(dirs)))

    def _exit_halfplanes(self, p, d):
        normals, offsets = self._halfplanes
        slack = offsets - normals @ p  # >= -tol for p inside
        rate = d @ normals.T
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = np.where(rate > 1e-15, np.maximum(slack, 0.0) / rate, np.inf)
        out = t.min(axis=1)
        return np.maximum(out, 0.0)

    def _exit_euclidean_ball(self, p, d):
        # |v + t d|^2 = r^2 with v = p - c
        v = p - np.asarray(self.center)
        a = np.einsum("ij,ij->i", d, d)
        b = 2.0 * (d @ v)
        c = float(v @ v) - self.radius ** 2
        disc = np.maximum(b * b - 4 * a * c, 0.0)
        t = (-b + np.sqrt(disc)) / (2 * a)
        return np.maximum(t, 0.0)

    def _exit_bisect(self, p, d):
        # {t : p + t d in X} is an interval containing 0, so bisection is valid
        lo = np.zeros(len(d))
        hi = np.full(len(d), 2.0 * self.radius / np.asarray(self.norm.norm(d)) + 1.0)
        c = np.asarray(self.center)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            ok = np.asarray(self.norm.norm(p + mid[:, None] * d - c)) <= self.radius
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
            if np.max(hi - lo) <= BISECT_TOL * 0.5:
                break
        return lo


def _nearest_on_polygon(q, verts):
    best, best_d = None, np.inf
    for a, b in zip(verts, np.roll(verts, -1, axis=0)):
        ab = b - a
        s = np.clip(np.dot(q - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        c = a + s * ab
        dd = np.hypot(*(q - c))
        if dd < best_d:
            best, best_d = c, dd
    return best


def direction_angles(M: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(M) / M


def sample_directions(norm: LpNorm, M: int) -> np.ndarray:
    """M unit directions (under ``norm``) at equally spaced angles from 0."""
    if M < 4:
        raise ValueError("need at least 4 directions")
    ang = direction_angles(M)
    v = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    # exact axis directions
    v[np.abs(v) < 1e-15] = 0.0
    return norm.unit(v)


@dataclass
class EmanationReport:
    flagged_angles: list[float]
    largest_drop: float
    checked_pairs: int

    @property
    def ok(self) -> bool:
        return not self.flagged_angles

    def to_dict(self):
        return {"flagged_angles": self.flagged_angles, "largest_drop": self.largest_drop,
                "checked_pairs": self.checked_pairs, "ok": self.ok}


def emanation_scan(X: ConvexRegion, p, M: int = 720, eps: float = 0.05,
                   beta_min: float | None = None) -> EmanationReport:
    """Look for numeric evidence against the emanation property at ``p``.

    Adjacent sampled directions that both enter X are compared in both
    orders; a drop of the exit length by more than ``eps`` across an
    angular gap below ``beta_min`` is flagged.
    """
    if M < 32:
        raise ValueError("emanation_scan needs M >= 32")
    gap = 2.0 * np.pi / M
    if beta_min is None:
        beta_min = 2.0 * gap
    L = X.ray_exit(p, sample_directions(X.norm, M))
    ang = direction_angles(M)
    nxt = np.roll(L, -1)
    both = (L > 0) & (nxt > 0)
    drop = np.maximum(L - nxt, nxt - L)
    flagged = both & (drop > eps) & (gap < beta_min)
    largest = float(drop[both].max()) if both.any() else 0.0
    return EmanationReport([float(a) for a in ang[flagged]], largest, int(both.sum()))
