import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.ndimage import binary_dilation

from zonekit.norms import LpNorm
from zonekit.region import ConvexRegion
from zonekit.scene import load_scene
from zonekit.zone import iterate

ROOT = Path(__file__).resolve().parent.parent
SCENES = ROOT / "scenes"
GOLDENS = ROOT / "goldens"

NORMS = [LpNorm(1), LpNorm(1.5), LpNorm(2), LpNorm(3), LpNorm(math.pi), LpNorm(7),
         LpNorm(math.inf)]

ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[c]
        ok = all(o for o, _ in checks)
        detail = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {c}: {detail}")


@pytest.fixture
def square3():
    return ConvexRegion.square(-3, 3, LpNorm(2))


class _Runs:
    """Zone iterations of shipped scenes, computed once per session."""

    def __init__(self):
        self._cache = {}

    def __call__(self, name):
        if name not in self._cache:
            scene = load_scene(SCENES / f"{name}.json")
            system = scene.system()
            t0 = time.perf_counter()
            state, report = iterate(system, scene.region, scene.config)
            self._cache[name] = (scene, system, state, report, time.perf_counter() - t0)
        return self._cache[name]


@pytest.fixture(scope="session")
def zone_runs():
    return _Runs()


def boundary_band(labels, width, outside=None):
    """Cells within ``width`` cells (Chebyshev) of a change in label.

    With ``outside`` set, the grid is framed by that label, so a region that
    reaches the frame has its boundary there too.
    """
    if outside is not None:
        framed = np.pad(labels, 1, constant_values=outside)
        return boundary_band(framed, width)[1:-1, 1:-1]
    edge = np.zeros(labels.shape, bool)
    dv = labels[:-1] != labels[1:]
    dh = labels[:, :-1] != labels[:, 1:]
    edge[:-1] |= dv
    edge[1:] |= dv
    edge[:, :-1] |= dh
    edge[:, 1:] |= dh
    return binary_dilation(edge, np.ones((2 * width + 1, 2 * width + 1), bool))


def random_points(rng, k, lo=-2.8, hi=2.8):
    return rng.uniform(lo, hi, size=(k, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
