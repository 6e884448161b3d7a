"""The Dom mapping, Voronoi seeding, and fixed-point iteration towards a zone diagram."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dominance import (CellFan, FanSetDistance, PointSetDistance, default_spacing,
                        default_tol, dom_fan, fan_excess, fan_hausdorff, workers)
from .region import ConvexRegion, sample_directions
from .sites import SiteSystem

log = logging.getLogger(__name__)

NO_GUARANTEES = "guarantees: none (norm not uniformly convex)"


class ZoneConsistencyError(RuntimeError):
    """An invariant that theory guarantees was found broken (kernel bug)."""


@dataclass
class ZoneConfig:
    M: int = 720
    tol: float | None = None
    h: float | None = None
    eps: float | None = None
    max_iter: int = 64
    grid_n: int = 200

    def resolved(self, X: ConvexRegion) -> "ZoneConfig":
        h = default_spacing(X) if self.h is None else float(self.h)
        return ZoneConfig(
            M=int(self.M),
            tol=default_tol(X) if self.tol is None else float(self.tol),
            h=h,
            eps=4.0 * h if self.eps is None else float(self.eps),
            max_iter=int(self.max_iter),
            grid_n=int(self.grid_n),
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ZoneState:
    cells: list
    epoch: int = 0

    def __post_init__(self):
        if len(self.cells) < 2:
            raise ValueError("a zone state needs at least 2 cells")


def _map_cells(fn, K: int):
    nw = workers()
    if nw > 1 and K > 1:
        with ThreadPoolExecutor(max_workers=min(nw, K)) as pool:
            return list(pool.map(fn, range(K)))
    return [fn(k) for k in range(K)]


def voronoi(sys: SiteSystem, X: ConvexRegion, cfg: ZoneConfig) -> ZoneState:
    cfg = cfg.resolved(X)
    dirs = sample_directions(X.norm, cfg.M)

    def cell(k):
        dist = PointSetDistance(sys.others(k), X.norm)
        return dom_fan(sys.sites[k], dist, X, cfg.M, cfg.tol, cfg.h, dirs)

    return ZoneState(_map_cells(cell, len(sys)), 0)


def dom_map(S: ZoneState, sys: SiteSystem, X: ConvexRegion, cfg: ZoneConfig) -> ZoneState:
    """Dom(R)_k = dom(P_k, union of the other cells)."""
    cfg = cfg.resolved(X)
    dirs = S.cells[0].dirs if S.cells[0].direction_count == cfg.M else \
        sample_directions(X.norm, cfg.M)

    def cell(k):
        rivals = FanSetDistance([c for j, c in enumerate(S.cells) if j != k], X.norm)
        if np.any(rivals.exact(sys.sites[k]) <= 0.0):
            raise ZoneConsistencyError(f"site {k} touches a rival cell")
        return dom_fan(sys.sites[k], rivals, X, cfg.M, cfg.tol, cfg.h, dirs)

    return ZoneState(_map_cells(cell, len(sys)), S.epoch + 1)


def uniform_hausdorff(S: ZoneState, T: ZoneState) -> float:
    """max over k of the Hausdorff distance between corresponding cells."""
    if len(S.cells) != len(T.cells):
        raise ValueError("states have different numbers of cells")
    return max(fan_hausdorff(a, b) for a, b in zip(S.cells, T.cells))


def uniform_excess(S: ZoneState, T: ZoneState) -> float:
    """max over k of the one-sided excess of S's cell over T's cell."""
    return max(fan_excess(a, b) for a, b in zip(S.cells, T.cells))


def fixed_point_residual(S: ZoneState, sys: SiteSystem, X: ConvexRegion,
                         cfg: ZoneConfig) -> float:
    return uniform_hausdorff(dom_map(S, sys, X, cfg), S)


@dataclass
class BracketReport:
    pairs: list = field(default_factory=list)  # (inner epoch, outer epoch, excess)
    tol: float = 0.0
    odd_even_gap: float | None = None

    @property
    def violations(self) -> list:
        return [p for p in self.pairs if p[2] > self.tol]

    @property
    def largest_excess(self) -> float:
        return max((p[2] for p in self.pairs), default=0.0)

    @property
    def violating_epochs(self) -> set:
        return {e for p in self.violations for e in p[:2]}

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "pairs": [{"inner": a, "outer": b, "excess": e} for a, b, e in self.pairs],
            "largest_excess": self.largest_excess,
            "violations": len(self.violations),
            "odd_even_gap": self.odd_even_gap,
        }


def bracketing_check(trajectory, tol_b: float) -> BracketReport:
    """Check S1 in S3 in S5 ... in S4 in S2 in S0, componentwise.

    Each inclusion is tested as a one-sided excess of the inner state over
    the outer one; pairs are the consecutive links of the odd and even
    chains plus the link from the last odd to the last even state.
    """
    if len(trajectory) < 4:
        raise ValueError("bracketing needs at least 4 states")
    odd = list(range(1, len(trajectory), 2))
    even = list(range(0, len(trajectory), 2))
    links = [(a, b) for a, b in zip(odd, odd[1:])]
    links += [(b, a) for a, b in zip(even, even[1:])]
    links.append((odd[-1], even[-1]))
    rep = BracketReport(tol=tol_b)
    for inner, outer in links:
        rep.pairs.append((inner, outer,
                          uniform_excess(trajectory[inner], trajectory[outer])))
    rep.odd_even_gap = uniform_hausdorff(trajectory[odd[-1]], trajectory[even[-1]])
    return rep


@dataclass
class IterationReport:
    steps: list
    residual: float
    verdict: str
    config: dict
    separation: float
    uniformly_convex: bool
    bracketing: BracketReport | None = None
    timings: dict = field(default_factory=dict)
    trajectory: list = field(default_factory=list, repr=False)

    @property
    def epochs(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        d = {
            "verdict": self.verdict,
            "epochs": self.epochs,
            "steps": self.steps,
            "residual": self.residual,
            "separation": self.separation,
            "config": self.config,
            "bracketing": self.bracketing.to_dict() if self.bracketing else None,
            "timings": self.timings,
        }
        if not self.uniformly_convex:
            d["guarantees"] = NO_GUARANTEES
        return d


def iterate(sys: SiteSystem, X: ConvexRegion, cfg: ZoneConfig | None = None,
            keep_trajectory: bool = True) -> tuple[ZoneState, IterationReport]:
    """Picard iteration of Dom from the Voronoi diagram."""
    cfg = (cfg or ZoneConfig()).resolved(X)
    if cfg.eps <= 2 * cfg.h:
        log.warning("eps=%g is not above 2h=%g; the stopping rule may never fire",
                    cfg.eps, 2 * cfg.h)
    if not X.norm.uniformly_convex():
        log.warning(NO_GUARANTEES)
    t0 = time.perf_counter()
    S = voronoi(sys, X, cfg)
    trajectory = [S]
    steps = []
    verdict = "budget-exhausted"
    for _ in range(cfg.max_iter):
        nxt = dom_map(S, sys, X, cfg)
        step = uniform_hausdorff(nxt, S)
        steps.append(step)
        log.debug("epoch %d step %.6g", nxt.epoch, step)
        S = nxt
        trajectory.append(S)
        if step <= cfg.eps:
            verdict = "converged"
            break
    t1 = time.perf_counter()
    residual = fixed_point_residual(S, sys, X, cfg)
    t2 = time.perf_counter()
    bracket = bracketing_check(trajectory, 2 * cfg.h) if len(trajectory) >= 4 else None
    report = IterationReport(
        steps=steps, residual=residual, verdict=verdict, config=cfg.to_dict(),
        separation=sys.separation, uniformly_convex=X.norm.uniformly_convex(),
        bracketing=bracket,
        timings={"iterate_s": t1 - t0, "residual_s": t2 - t1,
                 "bracketing_s": time.perf_counter() - t2},
        trajectory=trajectory if keep_trajectory else [],
    )
    return S, report


def min_cross_distance(S: ZoneState) -> float:
    """Smallest distance between the outlines of two different cells."""
    best = np.inf
    for k, a in enumerate(S.cells):
        for b in S.cells[k + 1:]:
            best = min(best, float(b.distance(a.outline).min()),
                       float(a.distance(b.outline).min()))
    return best


def min_distance_to_rival_sites(S: ZoneState, sys: SiteSystem) -> float:
    """min over k, j != k of d(cell_k, P_j), sampled on cell outlines."""
    best = np.inf
    for k, cell in enumerate(S.cells):
        for j, P in enumerate(sys.sites):
            if j != k:
                best = min(best, float(PointSetDistance(P, cell.norm)(cell.outline).min()))
    return best


def state_to_dict(S: ZoneState) -> dict:
    return {"epoch": S.epoch, "cells": [c.to_dict() for c in S.cells]}


__all__ = [
    "CellFan", "ZoneConfig", "ZoneState", "ZoneConsistencyError", "IterationReport",
    "BracketReport", "voronoi", "dom_map", "iterate", "fixed_point_residual",
    "bracketing_check", "uniform_hausdorff", "uniform_excess", "min_cross_distance",
    "min_distance_to_rival_sites", "state_to_dict", "NO_GUARANTEES",
]
