"""Seeded demo scenes in the style of the classic zone-diagram figures.

Coordinates are generated from fixed seeds; they are not the coordinates of
any published figure. Run ``python -m zonekit.gallery DIR`` to (re)write the
scene files.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

from .analysis import stream
from .norms import LpNorm
from .scene import dump_json, scene_to_dict, write_atomic
from .sites import SiteSpec


def _square(lo, hi):
    return {"type": "polygon", "vertices": [[lo, lo], [hi, lo], [hi, hi], [lo, hi]]}


def spread_points(count: int, lo: float, hi: float, min_sep: float, norm: LpNorm,
                  rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
    pts = []
    while len(pts) < count:
        q = rng.uniform(lo + margin, hi - margin, 2)
        if all(norm.distance(q, p) >= min_sep for p in pts):
            pts.append(np.round(q, 4))
    return np.array(pts)


def two_points() -> dict:
    n = LpNorm(2)
    return scene_to_dict(n, _square(-3, 3), [SiteSpec.from_points([(-1, 0)]),
                                            SiteSpec.from_points([(1, 0)])],
                         name="two_points")


def ten_points(seed: int = 2010) -> dict:
    """Ten point sites in the unit square under l_2 (Voronoi and zone figures)."""
    n = LpNorm(2)
    pts = spread_points(10, 0.0, 1.0, 0.1, n, stream(seed, "scene"), margin=0.05)
    return scene_to_dict(n, _square(0, 1), [SiteSpec.from_points([p]) for p in pts],
                         seed=seed, name="ten_points")


def grouped_points(name, p, groups, per_group, seed, min_sep=0.08) -> dict:
    n = LpNorm(p)
    pts = spread_points(groups * per_group, 0.0, 1.0, min_sep, n, stream(seed, "scene"),
                        margin=0.04)
    specs = [SiteSpec.from_points(pts[g * per_group:(g + 1) * per_group])
             for g in range(groups)]
    return scene_to_dict(n, _square(0, 1), specs, seed=seed, name=name)


def five_by_four(seed: int = 2010) -> dict:
    return grouped_points("five_by_four_l6", 6, 5, 4, seed)


def three_by_three(seed: int = 2010) -> dict:
    return grouped_points("three_by_three_p314159", 3.14159, 3, 3, seed, min_sep=0.12)


def counterexample(p=math.inf) -> dict:
    """A single point against three rivals in a square; l_inf by default."""
    n = LpNorm(p)
    label = "linf" if n.is_inf else f"l{n.label}"
    return scene_to_dict(n, _square(-3, 3), [
        SiteSpec.from_points([(0, 0)]),
        SiteSpec.from_points([(2, 0), (-2, 0), (0, -2)]),
    ], name=f"counterexample_{label}")


def segments() -> dict:
    """Two segment sites and a point, for site-discretization refinement."""
    n = LpNorm(2)
    return scene_to_dict(n, _square(-3, 3), [
        SiteSpec.segment((-2.0, -1.5), (-1.0, 1.5)),
        SiteSpec.segment((1.0, -1.0), (2.2, 1.0)),
        SiteSpec.from_points([(0.0, 2.4)]),
    ], iteration={"directions": 360}, name="segments")


def mixed(seed: int = 7) -> dict:
    """Point, polyline and circle sites under p = pi."""
    n = LpNorm(math.pi)
    return scene_to_dict(n, _square(-3, 3), [
        SiteSpec.ball_boundary((-1.5, -1.2), 0.6),
        SiteSpec.polyline([(0.8, -2.0), (1.6, -1.0), (2.2, -1.6)]),
        SiteSpec.from_points([(0.0, 1.8), (-2.0, 2.2)]),
    ], iteration={"directions": 360, "site_m": 20}, seed=seed, name="mixed")


SCENES = {
    "two_points": two_points,
    "ten_points": ten_points,
    "five_by_four_l6": five_by_four,
    "three_by_three_p314159": three_by_three,
    "counterexample_linf": counterexample,
    "counterexample_l4": lambda: counterexample(4),
    "segments": segments,
    "mixed": mixed,
}


def write_all(directory) -> list[Path]:
    out = []
    for name, make in SCENES.items():
        path = Path(directory) / f"{name}.json"
        write_atomic(path, dump_json(make()))
        out.append(path)
    return out


if __name__ == "__main__":  # pragma: no cover
    for p in write_all(sys.argv[1] if len(sys.argv) > 1 else "scenes"):
        print(p)
