"""The l_p norm family on the plane and the metric it induces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class LpNorm:
    """The l_p norm on R^2, ``p`` in [1, inf]; ``p == math.inf`` is the max norm."""

    p: float = 2.0

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise ValueError(f"p must lie in [1, inf], got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def is_inf(self) -> bool:
        return self.p == INF

    def uniformly_convex(self) -> bool:
        return 1.0 < self.p < INF

    @property
    def label(self) -> str:
        return "inf" if self.is_inf else format(self.p, "g")

    def norm(self, v) -> np.ndarray | float:
        """Norm of a vector or of each row of an ``(..., 2)`` array."""
        v = np.asarray(v, dtype=float)
        ax = np.abs(v[..., 0])
        ay = np.abs(v[..., 1])
        p = self.p
        if p == 1.0:
            out = ax + ay
        elif p == INF:
            out = np.maximum(ax, ay)
        elif p == 2.0:
            out = np.hypot(ax, ay)
        else:
            # max-factored so that large p or large coordinates cannot overflow
            m = np.maximum(ax, ay)
            safe = np.where(m > 0, m, 1.0)
            out = m * ((ax / safe) ** p + (ay / safe) ** p) ** (1.0 / p)
        if out.ndim == 0:
            return float(out)
        return out

    def distance(self, a, b):
        return self.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))

    def unit(self, v) -> np.ndarray:
        """Rescale nonzero vector(s) to unit norm."""
        v = np.asarray(v, dtype=float)
        n = np.asarray(self.norm(v))
        return v / n[..., None]


def norm(v, n: LpNorm) -> float:
    return n.norm(v)


def distance(a, b, n: LpNorm) -> float:
    return n.distance(a, b)


def pairwise_distances(a, b, n: LpNorm) -> np.ndarray:
    """Dense ``len(a) x len(b)`` distance matrix (brute force)."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    return np.asarray(n.norm(a[:, None, :] - b[None, :, :])).reshape(len(a), len(b))


def set_distance(x, A, n: LpNorm, chunk: int = 4096):
    """d(x, A) = min over members of A, for one point or an array of points.

    Evaluated by brute force, in chunks, so that results are reproducible
    bit for bit regardless of how ``A`` is split.
    """
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    if len(A) == 0:
        raise ValueError("set_distance: A must be nonempty")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x.reshape(-1, 2)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        out[s:s + chunk] = pairwise_distances(pts[s:s + chunk], A, n).min(axis=1)
    return float(out[0]) if single else out


def convexity_modulus_estimate(n: LpNorm, eps: float, samples: int = 360,
                               rounds: int = 6) -> float:
    """Sampling estimate of the modulus of convexity delta(eps).

    delta(eps) = 1 - sup{|(x+y)/2| : |x| = |y| = 1, |x - y| >= eps}.
    Unit vectors are parametrized by angle; a coarse grid over (angle,
    angular gap) is refined around the best pair for a few rounds. This is
    a measurement, not a certified bound.
    """
    if not 0.0 < eps <= 2.0:
        raise ValueError("eps must lie in (0, 2]")

    def evaluate(a, s):
        x = n.unit(np.stack([np.cos(a), np.sin(a)], axis=-1))
        y = n.unit(np.stack([np.cos(a + s), np.sin(a + s)], axis=-1))
        sep = n.norm(x - y)
        mid = n.norm((x + y) / 2.0)
        return np.where(sep >= eps - 1e-12, mid, -np.inf)

    a = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    s = np.linspace(0.0, np.pi, samples // 2 + 1)
    A, S = np.meshgrid(a, s, indexing="ij")
    vals = evaluate(A, S)
    best = float(vals.max())
    ia, is_ = np.unravel_index(int(vals.argmax()), vals.shape)
    a0, s0 = A[ia, is_], S[ia, is_]
    da, ds = a[1] - a[0], s[1] - s[0]
    for _ in range(rounds):
        la = np.linspace(a0 - da, a0 + da, 41)
        ls = np.clip(np.linspace(s0 - ds, s0 + ds, 41), 0.0, np.pi)
        LA, LS = np.meshgrid(la, ls, indexing="ij")
        v = evaluate(LA, LS)
        if v.max() >= best:
            best = float(v.max())
            ia, is_ = np.unravel_index(int(v.argmax()), v.shape)
            a0, s0 = LA[ia, is_], LS[ia, is_]
        da /= 10.0
        ds /= 10.0
    return max(0.0, 1.0 - best)
