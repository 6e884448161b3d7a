import json
import subprocess
import sys

import pytest

from zonekit import analysis, cli
from zonekit.zone import NO_GUARANTEES, ZoneConsistencyError

from conftest import SCENES


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    err = capsys.readouterr().err.strip().splitlines()
    return code, err


def scene_file(tmp_path, data, name="scene.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def small(p=2, **iteration):
    return {"norm": {"p": p},
            "region": {"type": "polygon", "vertices": [[-3, -3], [3, -3], [3, 3], [-3, 3]]},
            "sites": [{"type": "points", "points": [[-1, 0]]},
                      {"type": "points", "points": [[1, 0]]}],
            "iteration": {"directions": 180, **iteration}}


def test_voronoi_two_points(tmp_path, capsys):
    out, rep = tmp_path / "v.svg", tmp_path / "v.json"
    code, err = run(["voronoi", SCENES / "two_points.json", "-o", out, "--report", rep], capsys)
    assert code == 0 and err == []
    r = json.loads(rep.read_text())
    assert r["separation"] == pytest.approx(2.0)
    assert r["config"]["M"] == 720 and r["config"]["site_m"] == 50
    assert sum(r["cell_areas"]) == pytest.approx(36.0, rel=1e-3)
    assert out.read_text().startswith("<?xml")


def test_voronoi_one_site(tmp_path, capsys):
    data = small()
    data["sites"] = data["sites"][:1]
    code, err = run(["voronoi", scene_file(tmp_path, data), "-o", tmp_path / "x.svg"], capsys)
    assert code == 1
    assert err == ["input-error: sites: at least 2 sites required"]
    assert not (tmp_path / "x.svg").exists()


def test_malformed_json_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{\n  \"norm\": }")
    code, err = run(["zone", p, "-o", tmp_path / "z.svg"], capsys)
    assert code == 1 and len(err) == 1
    assert err[0].startswith("input-error: line 2 column 11:")


def test_zone_two_points(tmp_path, capsys):
    rep = tmp_path / "z.json"
    code, err = run(["zone", SCENES / "two_points.json", "-o", tmp_path / "z.svg",
                     "--report", rep, "--frames", tmp_path / "frames"], capsys)
    assert code == 0 and err == []
    r = json.loads(rep.read_text())
    assert r["verdict"] == "converged"
    assert r["residual"] <= r["config"]["eps"] + 2 * r["config"]["h"]
    assert r["bracketing"]["violations"] == 0
    assert "guarantees" not in r
    frames = sorted(p.name for p in (tmp_path / "frames").iterdir())
    assert frames[0] == "two_points_zone_000.svg" and len(frames) == r["epochs"] + 1


def test_zone_budget_exhausted_still_writes(tmp_path, capsys):
    out, rep = tmp_path / "z.svg", tmp_path / "z.json"
    code, err = run(["zone", scene_file(tmp_path, small()), "-o", out, "--report", rep,
                     "--max-iter", 1], capsys)
    assert code == 3
    assert len(err) == 1 and err[0].startswith("budget-exhausted: ")
    assert out.exists() and json.loads(rep.read_text())["verdict"] == "budget-exhausted"


def test_zone_linf_banner(tmp_path, capsys):
    rep = tmp_path / "z.json"
    code, _ = run(["zone", scene_file(tmp_path, small("inf")), "-o", tmp_path / "z.svg",
                   "--report", rep, "--max-iter", 2], capsys)
    assert code in (0, 3)
    assert json.loads(rep.read_text())["guarantees"] == NO_GUARANTEES


def test_zone_eps_override(tmp_path, capsys):
    rep = tmp_path / "z.json"
    run(["zone", scene_file(tmp_path, small()), "-o", tmp_path / "z.svg", "--report", rep,
         "--eps", 0.5], capsys)
    assert json.loads(rep.read_text())["config"]["eps"] == 0.5


def test_probe_decomp(tmp_path, capsys):
    rep = tmp_path / "p.json"
    code, err = run(["probe", SCENES / "five_by_four_l6.json", "--mode", "decomp",
                     "--report", rep], capsys)
    assert code == 0 and err == []
    assert json.loads(rep.read_text())["decomp"]["equal"] is True


def test_probe_tjump_counterexample(tmp_path, capsys):
    rep, csv = tmp_path / "p.json", tmp_path / "p.csv"
    code, _ = run(["probe", SCENES / "counterexample_linf.json", "--mode", "tjump",
                   "--report", rep, "--csv", csv], capsys)
    assert code == 0
    r = json.loads(rep.read_text())
    assert r["tjump"]["verdict"] == "jump" and r["guarantees"] == NO_GUARANTEES
    assert csv.read_text().startswith("M,max_jump\n720,")


def test_probe_tjump_p4(tmp_path, capsys):
    rep = tmp_path / "p.json"
    code, _ = run(["probe", SCENES / "counterexample_l4.json", "--mode", "tjump",
                   "--report", rep], capsys)
    assert code == 0
    assert json.loads(rep.read_text())["tjump"]["verdict"] == "continuous"


def test_probe_stability_to_stdout(capsys):
    code = cli.main(["probe", str(SCENES / "two_points.json"), "--mode", "stability",
                     "--trials", "3"])
    r = json.loads(capsys.readouterr().out)
    assert code == 0 and [row["delta"] for row in r["stability"]["rows"]] == [0.1, 0.05, 0.025]


def test_probe_stability_bad_deltas(capsys):
    code, err = run(["probe", SCENES / "two_points.json", "--mode", "stability",
                     "--deltas", "0.05,0.1"], capsys)
    assert code == 1 and err == ["input-error: deltas must be strictly decreasing"]


def test_probe_emanation(tmp_path, capsys):
    rep = tmp_path / "p.json"
    data = small()
    data["region"]["vertices"] = [[-1, -1], [1, -1], [1, 1], [-1, 1]]
    data["sites"] = [{"type": "points", "points": [[-0.3, 0]]},
                     {"type": "points", "points": [[0.3, 0]]}]
    data["iteration"] = {}
    code, _ = run(["probe", scene_file(tmp_path, data), "--mode", "emanation",
                   "--report", rep], capsys)
    r = json.loads(rep.read_text())
    assert code == 0 and r["emanation"]["violations"] == 0 and len(r["emanation"]["scans"]) == 2


def test_probe_emanation_flags_are_advisory(tmp_path, capsys):
    # on a 6x6 square, chords toward the corners grow faster than eps per step
    rep = tmp_path / "p.json"
    code, _ = run(["probe", SCENES / "two_points.json", "--mode", "emanation",
                   "--report", rep], capsys)
    r = json.loads(rep.read_text())
    assert code == 0 and r["emanation"]["violations"] >= 0


def test_probe_violation_exits_4(monkeypatch, capsys):
    monkeypatch.setattr(cli, "decomposition_check", lambda *a: False)
    code, err = run(["probe", SCENES / "two_points.json", "--mode", "decomp"], capsys)
    assert code == 4 and err == ["theory-violation: decomp probe violated a guaranteed property"]


def test_stability_violation_only_counts_for_uniformly_convex(monkeypatch, capsys):
    bad = analysis.StabilityTable(rows=[(0.1, 0.0, 1), (0.05, 1.0, 1)], grid_floor=0.01)
    monkeypatch.setattr(cli, "stability_probe", lambda *a, **k: bad)
    code, _ = run(["probe", SCENES / "two_points.json", "--mode", "stability"], capsys)
    assert code == 4
    code, _ = run(["probe", SCENES / "counterexample_linf.json", "--mode", "stability"], capsys)
    assert code == 0


def test_internal_error_exits_2(monkeypatch, tmp_path, capsys):
    def boom(*a, **k):
        raise ZoneConsistencyError("site 1 touches a rival cell")

    monkeypatch.setattr(cli, "iterate", boom)
    code, err = run(["zone", SCENES / "two_points.json", "-o", tmp_path / "z.svg"], capsys)
    assert code == 2 and err == ["internal-error: site 1 touches a rival cell"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "zonekit", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.startswith("zonekit ")
