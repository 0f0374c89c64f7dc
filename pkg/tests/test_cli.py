import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from resonex import __version__
from resonex.cli import COMMANDS, SCHEMA_VERSION, ConfigError, load_config, main, preset_path

from .oracles import disk_resonance

PRESETS = sorted(Path(preset_path("table1_N50")).parent.glob("*.json"))


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith(f"# resonex {__version__} config-sha256=")
    return list(csv.DictReader(lines[1:]))


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def disk_cfg(**extra):
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "domain": {"curves": [{"center": [0, 0], "radius": 1.0}]},
        "N": 16,
        "contour": {"center": [-0.42, -0.58], "radius": 0.1, "nodes": 16},
        "ss": {"probe_rank": 2, "moment_span": 2},
    }
    cfg.update(extra)
    return cfg


@pytest.mark.parametrize("path", PRESETS, ids=lambda p: p.name)
def test_shipped_presets_validate(path):
    load_config(path)


def test_every_subcommand_is_registered():
    assert set(COMMANDS) == {"resonances", "ep-search", "sweep", "encircle", "jordan", "field",
                             "mech", "selftest"}


def test_resonances_single_disk(tmp_path, capsys):
    assert main(["resonances", "--config", write(tmp_path, disk_cfg()), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "resonances.csv")
    assert len(rows) == 1
    k = complex(float(rows[0]["re"]), float(rows[0]["im"]))
    assert abs(k - disk_resonance(0)) <= 1e-8
    assert rows[0]["multiplicity"] == "1"
    # 17 significant digits in scientific notation
    assert len(rows[0]["re"].split("e")[0].replace("-", "").replace(".", "")) == 17
    assert json.loads(capsys.readouterr().out)["count"] == 1


def test_empty_contour_preset(tmp_path):
    assert main(["resonances", "--config", "preset:empty_contour", "--out", str(tmp_path)]) == 0
    assert read_csv(tmp_path / "resonances.csv") == []


def test_byte_identical_reruns_and_seed_in_hash(tmp_path):
    cfg = write(tmp_path, disk_cfg())
    outs = []
    for name, seed in (("a", None), ("b", None), ("c", 7)):
        args = ["resonances", "--config", cfg, "--out", str(tmp_path / name)]
        if seed is not None:
            args += ["--seed", str(seed)]
        assert main(args) == 0
        outs.append((tmp_path / name / "resonances.csv").read_text())
    assert outs[0] == outs[1]
    assert outs[0].splitlines()[0] != outs[2].splitlines()[0]


def test_unknown_key_rejected(tmp_path, capsys):
    assert main(["resonances", "--config", write(tmp_path, disk_cfg(colour="red"))]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and "colour" in err["message"]


def test_nested_unknown_key_rejected():
    cfg = disk_cfg()
    cfg["contour"]["nodez"] = 3
    with pytest.raises(ConfigError):
        load_config(cfg)


@pytest.mark.parametrize("text", ["{not json", json.dumps({"schema_version": 99})])
def test_bad_files(tmp_path, capsys, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    assert main(["resonances", "--config", str(p)]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "config"


def test_missing_file_and_missing_block(tmp_path, capsys):
    assert main(["resonances", "--config", str(tmp_path / "nope.json")]) == 2
    assert main(["sweep", "--config", write(tmp_path, disk_cfg())]) == 2
    assert main(["resonances"]) == 2


def test_overlapping_geometry_is_config_error(tmp_path, capsys):
    cfg = disk_cfg(domain={"curves": [{"center": [0, 0], "radius": 1.0},
                                      {"center": [1.5, 0], "radius": 1.0}]})
    assert main(["resonances", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 2
    assert "overlap" in json.loads(capsys.readouterr().err)["message"]


def test_solver_failure_exit_code(tmp_path, capsys):
    # contour reaching into the upper half plane is refused by the solver
    cfg = disk_cfg(contour={"center": [1.0, 0.0], "radius": 0.5, "nodes": 16})
    assert main(["resonances", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "solver" and err["type"] == "ContourError"


def test_ep_search_budget_of_one(tmp_path):
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "domain": {"grid": {"columns": 1, "rows": 1, "radii": [0.4, 0.4]}},
        "N": 8,
        "contour": {"center": [3.0, -0.3], "radius": 0.2, "nodes": 16},
        "ss": {"probe_rank": 2, "moment_span": 2},
        "ep_search": {"start": [0.4, 0.3], "max_evals": 1},
    }
    assert main(["ep-search", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "ep_report.json").read_text())
    assert rep["budget_exhausted"] and rep["evaluations"] == 1
    assert (rep["R1"], rep["R2"]) == (0.4, 0.3)
    assert len(read_csv(tmp_path / "ep_iterations.csv")) == 1


def test_ep_search_needs_grid(tmp_path):
    cfg = disk_cfg(ep_search={"start": [0.3, 0.3]})
    assert main(["ep-search", "--config", write(tmp_path, cfg)]) == 2


def test_encircle_simple_resonance_is_identity(tmp_path):
    k = disk_resonance(0)
    cfg = disk_cfg(encircle={"k0": [k.real, k.imag], "radius": 1e-3, "steps": 16, "count": 1})
    assert main(["encircle", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "encircle.json").read_text())
    assert rep["is_identity"]
    rows = read_csv(tmp_path / "encircle.csv")
    assert len(rows) == 17 and float(rows[-1]["theta"]) == pytest.approx(2 * math.pi)


def test_sweep_simple_resonance_is_linear(tmp_path):
    k = disk_resonance(0)
    cfg = disk_cfg(sweep={"k0": [k.real, k.imag], "eps": {"min": 1e-6, "max": 1e-3, "count": 4},
                          "mode": "shift"})
    assert main(["sweep", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "sweep.json").read_text())
    assert abs(rep["slope"] - 1) < 0.05
    assert len(read_csv(tmp_path / "sweep.csv")) == 4


def test_jordan_at_simple_disk_resonance(tmp_path):
    k = disk_resonance(0)
    cfg = disk_cfg(jordan={"points": [{"label": "disk", "k": [k.real + 1e-7, k.imag], "refine": True}]})
    assert main(["jordan", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "jordan.json").read_text())["points"][0]
    # a simple resonance: the chain equation is not solvable
    assert rep["functional"] > 1e-2
    assert rep["adjoint_alignment"] > 1 - 1e-8


def test_field_normalization_and_mask(tmp_path):
    k = disk_resonance(0)
    cfg = disk_cfg(field={"k0": [k.real, k.imag], "x": [-2, 2], "y": [-2, 2], "nx": 21, "ny": 11,
                          "normalize_at": [1.8, 0]})
    assert main(["field", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "field.json").read_text())
    assert abs(complex(*rep["normalized_value"]) - 1) <= 1e-12
    assert rep["all_finite"]
    rows = read_csv(tmp_path / "field.csv")
    assert len(rows) == 21 * 11
    inside = [r for r in rows if float(r["x"]) ** 2 + float(r["y"]) ** 2 < 0.9]
    assert inside and all(r["valid"] == "0" and float(r["abs"]) == 0 for r in inside)
    # n = 0 mode: |u| depends on the radius only
    ring = [float(r["abs"]) for r in rows if abs(math.hypot(float(r["x"]), float(r["y"])) - 2) < 1e-9]
    assert np.ptp(ring) < 1e-6 * max(ring)


def test_mech_preset(tmp_path):
    assert main(["mech", "--config", "preset:mech_bloch_band", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "mech.json").read_text())
    assert rep["max_eigenvalue_to_band"] < 0.01
    assert {(e["geometric"], e["algebraic"]) for e in rep["bloch_defective"]} == {(1, 2)}
    assert len(read_csv(tmp_path / "chain.csv")) == 320
    assert len(read_csv(tmp_path / "band.csv")) == 2001


def test_threads_flag(tmp_path):
    assert main(["resonances", "--config", write(tmp_path, disk_cfg()), "--out", str(tmp_path),
                 "--threads", "1"]) == 0
    assert main(["resonances", "--config", write(tmp_path, disk_cfg()), "--threads", "0"]) == 2


def test_selftest_subprocess(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "resonex.cli", "selftest", "--out", str(tmp_path)],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0, proc.stderr
    rep = json.loads((tmp_path / "selftest.json").read_text())
    assert rep["passed"] and len(rep["checks"]) >= 20
