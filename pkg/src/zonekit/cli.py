"""zonekit command line: voronoi, zone and probe commands.

Exit codes: 0 ok, 1 input, 2 internal, 3 budget exhausted, 4 theory violation.
Every failure prints one line to stderr, prefixed with its exit class.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import ProbeError, decomposition_check, stability_probe, t_jump_scan
from .dominance import DominanceError, PointSetDistance, dom_fan, rasterize_fan
from .region import emanation_scan
from .render import RenderSpec, frame_name, render_state
from .scene import SceneError, dump_json, load_scene, write_atomic
from .zone import (NO_GUARANTEES, ZoneConsistencyError, iterate, min_cross_distance,
                   min_distance_to_rival_sites, voronoi)

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL, EXIT_BUDGET, EXIT_THEORY = 0, 1, 2, 3, 4
EXIT_CLASS = {EXIT_INPUT: "input-error", EXIT_INTERNAL: "internal-error",
              EXIT_BUDGET: "budget-exhausted", EXIT_THEORY: "theory-violation"}

log = logging.getLogger("zonekit")


class CommandFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _cell_areas(S, X, n):
    x0, y0, x1, y1 = X.bbox
    cell = (x1 - x0) * (y1 - y0) / (n * n)
    return [float(rasterize_fan(c, X, n).bits.sum() * cell) for c in S.cells]


def _base_report(command, scene, sys_):
    rep = {
        "command": command,
        "scene": scene.name,
        "norm": {"p": scene.norm.label},
        "seed": scene.seed,
        "config": scene.resolved_config(),
        "separation": sys_.separation,
        "closest_pair": list(sys_.closest_pair),
        "site_points": [len(s) for s in sys_.sites],
    }
    if not scene.norm.uniformly_convex():
        rep["guarantees"] = NO_GUARANTEES
    return rep


def cmd_voronoi(args) -> int:
    scene = load_scene(args.scene)
    sys_ = scene.system()
    t0 = time.perf_counter()
    S = voronoi(sys_, scene.region, scene.config)
    t1 = time.perf_counter()
    rep = _base_report("voronoi", scene, sys_)
    rep["cell_areas"] = _cell_areas(S, scene.region, scene.config.grid_n)
    rep["timings"] = {"voronoi_s": t1 - t0}
    svg = render_state(S, sys_, scene.region, RenderSpec(label=f"{scene.name} voronoi"))
    write_atomic(args.output, svg)
    if args.report:
        write_atomic(args.report, dump_json(rep))
    return EXIT_OK


def cmd_zone(args) -> int:
    scene = load_scene(args.scene)
    if args.eps is not None:
        scene.config.eps = args.eps
    if args.max_iter is not None:
        scene.config.max_iter = args.max_iter
    sys_ = scene.system()
    S, it = iterate(sys_, scene.region, scene.config, keep_trajectory=True)
    if args.frames:
        for st in it.trajectory:
            svg = render_state(st, sys_, scene.region,
                               RenderSpec(label=f"{scene.name} epoch {st.epoch}"))
            write_atomic(Path(args.frames) / frame_name(scene.name, "zone", st.epoch), svg)
    rep = _base_report("zone", scene, sys_)
    body = it.to_dict()
    rep.update({k: v for k, v in body.items() if k not in ("config", "separation")})
    rep["cell_areas"] = _cell_areas(S, scene.region, scene.config.grid_n)
    rep["min_cell_gap"] = min_cross_distance(S)
    rep["min_cell_to_rival_site"] = min_distance_to_rival_sites(S, sys_)
    svg = render_state(S, sys_, scene.region, RenderSpec(label=f"{scene.name} zone"))
    write_atomic(args.output, svg)
    if args.report:
        write_atomic(args.report, dump_json(rep))
    return EXIT_OK if it.verdict == "converged" else EXIT_BUDGET


def _probe_sets(sys_):
    # the first site against the union of the rest
    return sys_.sites[0], sys_.others(0)


def cmd_probe(args) -> int:
    scene = load_scene(args.scene)
    sys_ = scene.system()
    X = scene.region
    cfg = scene.config.resolved(X)
    uc = scene.norm.uniformly_convex()
    rep = _base_report("probe", scene, sys_)
    rep["mode"] = args.mode
    csv_text = None
    violated = False
    if args.mode == "stability":
        P, A = _probe_sets(sys_)
        deltas = [float(d) for d in args.deltas.split(",")] if args.deltas else [0.1, 0.05, 0.025]
        table = stability_probe(P, A, X, deltas, args.trials, cfg.grid_n, seed=scene.seed)
        rep["stability"] = table.to_dict()
        csv_text = table.to_csv()
        violated = uc and not table.monotone()
    elif args.mode == "tjump":
        P, A = _probe_sets(sys_)
        fan = dom_fan(P, PointSetDistance(A, X.norm), X, cfg.M, cfg.tol, cfg.h)
        jr = t_jump_scan(fan, args.doublings)
        rep["tjump"] = jr.to_dict()
        csv_text = jr.to_csv()
        violated = uc and jr.verdict == "jump"
    elif args.mode == "decomp":
        parts = list(sys_.sites[:-1])
        equal = decomposition_check(parts, sys_.sites[-1], X, cfg.grid_n)
        rep["decomp"] = {"parts": len(parts), "grid_n": cfg.grid_n, "equal": equal}
        violated = not equal
    elif args.mode == "emanation":
        scans = []
        for k, P in enumerate(sys_.sites):
            for q in P:
                r = emanation_scan(X, q, max(cfg.M, 32), args.scan_eps)
                scans.append({"site": k, "point": [float(q[0]), float(q[1])], **r.to_dict()})
        rep["emanation"] = {"eps": args.scan_eps, "scans": scans,
                            "violations": sum(not s["ok"] for s in scans)}
    if args.report:
        write_atomic(args.report, dump_json(rep))
    else:
        sys.stdout.write(dump_json(rep))
    if args.csv and csv_text is not None:
        write_atomic(args.csv, csv_text)
    if violated:
        raise CommandFailure(EXIT_THEORY, f"{args.mode} probe violated a guaranteed property")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zonekit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"zonekit {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("voronoi", help="Voronoi diagram of a scene")
    v.add_argument("scene")
    v.add_argument("-o", "--output", required=True)
    v.add_argument("--report")
    v.set_defaults(func=cmd_voronoi)

    z = sub.add_parser("zone", help="zone diagram by fixed-point iteration")
    z.add_argument("scene")
    z.add_argument("-o", "--output", required=True)
    z.add_argument("--report")
    z.add_argument("--frames", help="directory for per-epoch SVG frames")
    z.add_argument("--eps", type=float)
    z.add_argument("--max-iter", type=int)
    z.set_defaults(func=cmd_zone)

    p = sub.add_parser("probe", help="empirical checks of continuity and decomposition")
    p.add_argument("scene")
    p.add_argument("--mode", required=True, choices=["stability", "tjump", "decomp", "emanation"])
    p.add_argument("--deltas", help="comma-separated, strictly decreasing")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--doublings", type=int, default=3)
    p.add_argument("--scan-eps", type=float, default=0.05)
    p.add_argument("--report")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_probe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code = args.func(args)
    except (SceneError, ProbeError) as e:
        code, msg = EXIT_INPUT, str(e)
    except (ZoneConsistencyError, DominanceError) as e:
        code, msg = EXIT_INTERNAL, str(e)
    except CommandFailure as e:
        code, msg = e.code, str(e)
    else:
        if code == EXIT_BUDGET:
            msg = "iteration budget exhausted before convergence (state written)"
        else:
            return code
    print(f"{EXIT_CLASS[code]}: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
