"""Empirical probes: Hausdorff stability of dom, reach continuity, union decomposition."""

from __future__ import annotations

import csv
import io
import zlib
from dataclasses import dataclass, field

import numpy as np

from .dominance import (CellFan, GridMask, dom_fan, dom_grid_oracle, hausdorff,
                        max_adjacent_jump)
from .norms import pairwise_distances
from .region import ConvexRegion


class ProbeError(ValueError):
    pass


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Independent, reproducible generator for a named consumer of ``seed``."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), zlib.crc32(name.encode()), *map(int, extra)]))


def mask_boundary_cloud(mask: GridMask) -> np.ndarray:
    return mask.centers()[mask.boundary()]


def jitter(points, delta: float, X: ConvexRegion, rng: np.random.Generator) -> np.ndarray:
    """Move each point to a uniform random point of its open delta-ball, kept in X."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    norm = X.norm
    out = pts.copy()
    if delta == 0:
        return out
    for i, q in enumerate(pts):
        for _ in range(1000):
            v = rng.uniform(-delta, delta, 2)
            if norm.norm(v) >= delta:
                continue
            cand = X.project(q + v)
            if norm.distance(cand, q) < delta:
                out[i] = cand
                break
        else:  # pragma: no cover - needs a degenerate region
            raise ProbeError("could not place a perturbed point inside X")
    return out


@dataclass
class StabilityTable:
    rows: list = field(default_factory=list)  # (delta, measured, trials)
    seed: int = 0
    grid_n: int = 0
    grid_floor: float = 0.0

    @property
    def measured(self) -> list:
        return [r[1] for r in self.rows]

    def monotone(self, inversions: int = 1) -> bool:
        """Non-increasing down the table, up to ``inversions`` grid-floor-sized bumps."""
        bumps = 0
        m = self.measured
        for a, b in zip(m, m[1:]):
            if b > a:
                if b - a > self.grid_floor:
                    return False
                bumps += 1
        return bumps <= inversions

    def to_dict(self) -> dict:
        return {"seed": self.seed, "grid_n": self.grid_n, "grid_floor": self.grid_floor,
                "rows": [{"delta": d, "measured": m, "trials": t} for d, m, t in self.rows],
                "monotone": self.monotone()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "measured", "trials"])
        for d, m, t in self.rows:
            w.writerow([f"{d:.6g}", f"{m:.6f}", t])
        return buf.getvalue()


def stability_probe(P, A, X: ConvexRegion, deltas, trials: int = 20, n: int = 200,
                    seed: int = 0) -> StabilityTable:
    """Max Hausdorff displacement of dom(P, A)'s oracle boundary under delta-jitter."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    norm = X.norm
    r = float(pairwise_distances(P, A, norm).min())
    if r <= 0:
        raise ProbeError("d(P, A) must be positive")
    deltas = [float(d) for d in deltas]
    if any(d < 0 or d >= r / 6.0 for d in deltas):
        raise ProbeError(f"every delta must lie in [0, d(P,A)/6) = [0, {r / 6.0:.6g})")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ProbeError("deltas must be strictly decreasing")
    base = mask_boundary_cloud(dom_grid_oracle(P, A, X, n))
    px, py = GridMask(n, X.bbox, np.zeros((1, 1))).pitch
    table = StabilityTable(seed=seed, grid_n=n, grid_floor=float(norm.norm([px, py])))
    for di, d in enumerate(deltas):
        worst = 0.0
        for t in range(trials):
            rng = stream(seed, "stability", di, t)
            P2 = jitter(P, d, X, rng)
            A2 = jitter(A, d, X, rng)
            if d > 0 and (hausdorff(P, P2, norm) >= d or hausdorff(A, A2, norm) >= d):
                raise ProbeError("perturbation left the delta-ball")  # pragma: no cover
            moved = mask_boundary_cloud(dom_grid_oracle(P2, A2, X, n))
            worst = max(worst, hausdorff(base, moved, norm))
        table.rows.append((d, worst, trials))
    return table


@dataclass
class JumpReport:
    levels: list  # (M, max adjacent jump)
    verdict: str
    threshold: float

    @property
    def stabilized_jump(self) -> float:
        return self.levels[-1][1]

    def to_dict(self) -> dict:
        return {"levels": [{"M": m, "max_jump": j} for m, j in self.levels],
                "verdict": self.verdict, "threshold": self.threshold,
                "stabilized_jump": self.stabilized_jump}

    def to_csv(self) -> str:
        lines = ["M,max_jump"] + [f"{m},{j:.6f}" for m, j in self.levels]
        return "\n".join(lines) + "\n"


def t_jump_scan(fan: CellFan, doublings: int = 3, threshold: float | None = None,
                shrink: float = 0.75) -> JumpReport:
    """Track the largest reach jump between neighbouring directions as M doubles.

    "continuous" when the jump shrinks by at least ``shrink`` per doubling
    on average, "jump" when it stays above ``threshold`` (default a quarter
    of the region's diameter) without shrinking, else "inconclusive".
    """
    if doublings < 2:
        raise ValueError("need at least 2 doublings")
    if fan.source is None:
        raise ValueError("fan has no recorded source; build it with dom_fan")
    dist, X, tol = fan.source
    if threshold is None:
        threshold = 0.25 * X.diameter
    M0 = fan.direction_count
    levels = [(M0, max_adjacent_jump(fan))]
    for k in range(1, doublings + 1):
        M = M0 * 2 ** k
        f = dom_fan(fan.anchors, dist, X, M, tol, fan.spacing)
        levels.append((M, max_adjacent_jump(f)))
    first, last = levels[0][1], levels[-1][1]
    prev = levels[-2][1]
    if last == 0.0 or (first > 0 and (last / first) ** (1.0 / doublings) <= shrink):
        verdict = "continuous"
    elif last >= threshold and last > shrink * prev:
        verdict = "jump"
    else:
        verdict = "inconclusive"
    return JumpReport(levels, verdict, float(threshold))


def decomposition_check(parts, A, X: ConvexRegion, n: int) -> bool:
    """dom(union of parts, A) equals the union of dom(part, A), cell for cell."""
    parts = [np.asarray(p, dtype=float).reshape(-1, 2) for p in parts]
    if not parts:
        raise ValueError("need at least one part")
    whole = dom_grid_oracle(np.concatenate(parts), A, X, n).bits
    union = np.zeros_like(whole)
    for p in parts:
        union |= dom_grid_oracle(p, A, X, n).bits
    return bool(np.array_equal(whole, union))

