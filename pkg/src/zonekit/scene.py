"""Scene files: JSON in, validated region + site system + iteration config out."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .norms import LpNorm
from .region import ConvexRegion, RegionError
from .sites import SiteSpec, SiteSystem, SiteValidationError, validate_system
from .zone import ZoneConfig

DEFAULT_SITE_M = 50


class SceneError(ValueError):
    """Input problem, addressed by JSON field path or by line/column."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class Scene:
    name: str
    norm: LpNorm
    region: ConvexRegion
    specs: list
    config: ZoneConfig
    site_m: int
    seed: int
    raw: dict

    def system(self) -> SiteSystem:
        try:
            return validate_system(self.specs, self.region, self.site_m, self.norm)
        except SiteValidationError as e:
            raise SceneError("sites", str(e)) from e

    def resolved_config(self) -> dict:
        cfg = self.config.resolved(self.region).to_dict()
        cfg["site_m"] = self.site_m
        return cfg


def _num(v, where, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SceneError(where, "expected a number")
    if integer and int(v) != v:
        raise SceneError(where, "expected an integer")
    if not math.isfinite(v):
        raise SceneError(where, "expected a finite number")
    if positive and v <= 0:
        raise SceneError(where, "must be positive")
    return int(v) if integer else float(v)


def _point(v, where):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise SceneError(where, "expected [x, y]")
    return (_num(v[0], f"{where}[0]"), _num(v[1], f"{where}[1]"))


def _points(v, where):
    if not isinstance(v, list) or not v:
        raise SceneError(where, "expected a nonempty list of [x, y]")
    return [_point(q, f"{where}[{i}]") for i, q in enumerate(v)]


def _obj(v, where):
    if not isinstance(v, dict):
        raise SceneError(where, "expected an object")
    return v


def parse_norm(v) -> LpNorm:
    v = _obj(v, "norm")
    if "p" not in v:
        raise SceneError("norm.p", "missing")
    p = v["p"]
    if isinstance(p, str):
        if p.lower() != "inf":
            raise SceneError("norm.p", 'expected a number >= 1 or "inf"')
        return LpNorm(math.inf)
    p = _num(p, "norm.p")
    if p < 1:
        raise SceneError("norm.p", "must be >= 1")
    return LpNorm(p)


def parse_region(v, norm: LpNorm) -> ConvexRegion:
    v = _obj(v, "region")
    kind = v.get("type")
    try:
        if kind == "polygon":
            return ConvexRegion.polygon(_points(v.get("vertices"), "region.vertices"), norm)
        if kind == "ball":
            return ConvexRegion.ball(_point(v.get("center"), "region.center"),
                                     _num(v.get("radius"), "region.radius", positive=True), norm)
    except RegionError as e:
        raise SceneError("region", str(e)) from e
    raise SceneError("region.type", 'expected "polygon" or "ball"')


def parse_site(v, i: int) -> SiteSpec:
    where = f"sites[{i}]"
    v = _obj(v, where)
    kind = v.get("type")
    if kind == "points":
        return SiteSpec.from_points(_points(v.get("points"), f"{where}.points"))
    if kind == "segment":
        return SiteSpec.segment(_point(v.get("a"), f"{where}.a"), _point(v.get("b"), f"{where}.b"))
    if kind == "polyline":
        return SiteSpec.polyline(_points(v.get("points"), f"{where}.points"))
    if kind in ("ball", "ball_boundary"):
        c = _point(v.get("center"), f"{where}.center")
        r = _num(v.get("radius"), f"{where}.radius", positive=True)
        return SiteSpec(kind, center=c, radius=r)
    raise SceneError(f"{where}.type",
                     'expected one of "points", "segment", "polyline", "ball_boundary", "ball"')


_ITER_KEYS = {"directions", "bisect_tol", "cloud_pitch", "eps", "max_iter", "site_m", "grid"}


def parse_scene(data: dict, name: str = "scene") -> Scene:
    data = _obj(data, "scene")
    norm = parse_norm(data.get("norm"))
    region = parse_region(data.get("region"), norm)
    sites = data.get("sites")
    if not isinstance(sites, list):
        raise SceneError("sites", "expected a list")
    if len(sites) < 2:
        raise SceneError("sites", "at least 2 sites required")
    specs = [parse_site(s, i) for i, s in enumerate(sites)]
    it = _obj(data.get("iteration", {}), "iteration")
    unknown = sorted(set(it) - _ITER_KEYS)
    if unknown:
        raise SceneError(f"iteration.{unknown[0]}", "unknown field")

    def opt(key, **kw):
        return None if it.get(key) is None else _num(it[key], f"iteration.{key}", **kw)

    M = opt("directions", positive=True, integer=True) or 720
    if M < 4:
        raise SceneError("iteration.directions", "must be at least 4")
    cfg = ZoneConfig(M=M, tol=opt("bisect_tol", positive=True), h=opt("cloud_pitch", positive=True),
                     eps=opt("eps", positive=True),
                     max_iter=opt("max_iter", positive=True, integer=True) or 64,
                     grid_n=opt("grid", positive=True, integer=True) or 200)
    site_m = opt("site_m", positive=True, integer=True) or DEFAULT_SITE_M
    seed = _num(data.get("seed", 0), "seed", integer=True)
    return Scene(str(data.get("name", name)), norm, region, specs, cfg, site_m, seed, data)


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise SceneError(str(path), f"cannot read scene ({e.strerror})") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneError(f"line {e.lineno} column {e.colno}", e.msg) from e
    return parse_scene(data, name=path.stem)


def scene_to_dict(norm: LpNorm, region: dict, specs, iteration: dict | None = None,
                  seed: int = 0, name: str | None = None) -> dict:
    d = {}
    if name:
        d["name"] = name
    d["norm"] = {"p": "inf" if norm.is_inf else norm.p}
    d["region"] = region
    d["sites"] = [s.to_dict() for s in specs]
    if iteration:
        d["iteration"] = iteration
    d["seed"] = seed
    return d


def write_atomic(path, data: str | bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
