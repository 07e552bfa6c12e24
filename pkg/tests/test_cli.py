"""Command-line interface: subcommands, exit codes, files, determinism."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from framewatt.cli import main
from framewatt.cstates import load_calibration
from conftest import make_config
from framewatt.core import Scheme


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "config.json"
    cfg = make_config("4k", 60, Scheme.BURSTLINK)
    path.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
    return path


@pytest.fixture()
def broken_config_file(tmp_path):
    path = tmp_path / "broken.json"
    doc = make_config("4k", 60, Scheme.BURSTLINK).to_dict()
    doc["display"]["panel_has_drfb"] = False
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# -- simulate -----------------------------------------------------------------


def test_simulate_preset_prints_the_headline_figures(capsys):
    assert main(["simulate", "--preset", "4k60", "--scheme", "burstlink"]) == 0
    out = capsys.readouterr().out
    assert "average power" in out
    assert "burstlink" in out
    assert "residency" in out


def test_simulate_writes_the_result_files(tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["simulate", "--preset", "fhd30", "--out", str(out_dir)]) == 0
    for name in ("report.json", "report.csv", "timeline.csv", "timeline.svg"):
        assert (out_dir / name).exists()
    doc = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert doc["manifest"]["command"] == "simulate"
    assert doc["manifest"]["preset"] == "fhd30"
    assert doc["report"]["average_power_mw"] > 0
    assert doc["config"]["workload"]["scheme"] == "baseline"


def test_simulate_accepts_config_files(config_file, capsys):
    assert main(["simulate", "--config", str(config_file)]) == 0
    assert "burstlink" in capsys.readouterr().out


def test_simulate_json_only_format(tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["simulate", "--preset", "fhd30", "--out", str(out_dir),
                 "--format", "json"]) == 0
    assert (out_dir / "report.json").exists()
    assert not (out_dir / "report.csv").exists()


def test_simulate_is_byte_deterministic(tmp_path, capsys):
    out = tmp_path / "run"
    names = ("report.json", "report.csv", "timeline.csv", "timeline.svg")
    assert main(["simulate", "--preset", "4k60", "--scheme", "burstlink",
                 "--out", str(out)]) == 0
    first = {name: (out / name).read_bytes() for name in names}
    assert main(["simulate", "--preset", "4k60", "--scheme", "burstlink",
                 "--out", str(out)]) == 0
    for name in names:
        assert (out / name).read_bytes() == first[name]


def test_simulate_rejects_both_config_and_preset(config_file, capsys):
    code = main(["simulate", "--config", str(config_file), "--preset", "fhd30"])
    assert code == 2
    assert "mutually exclusive" in capsys.readouterr().err


def test_simulate_requires_a_source(capsys):
    assert main(["simulate"]) == 2
    assert "required" in capsys.readouterr().err


def test_simulate_flags_invalid_configurations(broken_config_file, capsys):
    assert main(["simulate", "--config", str(broken_config_file)]) == 2
    err = capsys.readouterr().err
    assert "BURST_NEEDS_DRFB" in err


def test_simulate_missing_config_file_is_a_runtime_error(capsys):
    assert main(["simulate", "--config", "/does/not/exist.json"]) == 1


def test_workload_overrides_reach_the_report(tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["simulate", "--preset", "fhd30", "--scheme", "bypass_only",
                 "--fps", "60", "--out", str(out_dir)]) == 0
    doc = json.loads((out_dir / "report.json").read_text(encoding="utf-8"))
    assert doc["config"]["workload"]["scheme"] == "bypass_only"
    assert doc["config"]["workload"]["video_fps"] == 60
    assert doc["manifest"]["overrides"]["scheme"] == "bypass_only"


# -- compare ------------------------------------------------------------------


def test_compare_two_schemes_side_by_side(tmp_path, capsys):
    out_dir = tmp_path / "cmp"
    assert main(["compare", "--preset", "4k60", "--scheme-b", "burstlink",
                 "--out", str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert "average_power_mw" in out
    doc = json.loads((out_dir / "compare.json").read_text(encoding="utf-8"))
    assert doc["a"]["report"]["average_power_mw"] > doc["b"]["report"]["average_power_mw"]
    assert doc["delta"]["average_power_pct"] < 0
    assert (out_dir / "compare.csv").exists()


def test_compare_warns_on_unlike_panels(capsys):
    assert main(["compare", "--preset", "4k60", "--preset-b", "fhd30"]) == 0
    assert "different display configurations" in capsys.readouterr().err


def test_compare_side_b_inherits_side_a_overlays(tmp_path, capsys):
    out_dir = tmp_path / "cmp"
    assert main(["compare", "--preset", "4k60", "--fbc-ratio", "0.5",
                 "--scheme-b", "baseline", "--fbc-ratio-b", "1.0",
                 "--out", str(out_dir)]) == 0
    doc = json.loads((out_dir / "compare.json").read_text(encoding="utf-8"))
    # A runs compressed, B explicitly uncompressed: B must cost more
    assert doc["delta"]["average_power_pct"] > 0


# -- sweep --------------------------------------------------------------------


def test_sweep_reports_reductions_against_the_plain_scheme(tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    assert main(["sweep", "--resolutions", "fhd,4k", "--fps", "60",
                 "--schemes", "baseline,burstlink", "--out", str(out_dir)]) == 0
    doc = json.loads((out_dir / "sweep.json").read_text(encoding="utf-8"))
    rows = {(r["resolution"], r["scheme"]): r for r in doc["rows"]}
    assert rows[("1920x1080", "baseline")]["reduction_vs_baseline_pct"] == 0.0
    assert rows[("3840x2160", "burstlink")]["reduction_vs_baseline_pct"] == pytest.approx(
        43.4739, abs=5e-4
    )
    assert (out_dir / "sweep.csv").read_text(encoding="utf-8").startswith(
        "resolution,"
    )


def test_sweep_marks_impossible_points_as_skipped(capsys):
    assert main(["sweep", "--resolutions", "fhd", "--fps", "45",
                 "--schemes", "baseline"]) == 0
    out = capsys.readouterr().out
    assert "skipped" in out
    assert "FPS_NOT_DIVISOR" in out


def test_sweep_output_is_deterministic(tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--resolutions", "fhd,qhd", "--fps", "30,60",
                 "--out", str(out)]) == 0
    first_csv = (out / "sweep.csv").read_bytes()
    first_json = (out / "sweep.json").read_bytes()
    assert main(["sweep", "--resolutions", "fhd,qhd", "--fps", "30,60",
                 "--out", str(out)]) == 0
    assert (out / "sweep.csv").read_bytes() == first_csv
    assert (out / "sweep.json").read_bytes() == first_json


# -- calibrate ------------------------------------------------------------------


@pytest.fixture()
def runs_file(tmp_path):
    import random

    from framewatt.cstates import PackageCState

    profile = load_calibration("default").conventional
    rng = random.Random(5)
    states = list(PackageCState)
    lines = ["label," + ",".join(s.value for s in states) + ",power_mw"]
    for i in range(24):
        weights = [rng.random() + 0.05 for _ in states]
        total = sum(weights)
        residency = [w / total for w in weights]
        power = sum(
            profile.state_power_mw[s] * r for s, r in zip(states, residency)
        )
        lines.append(
            f"run{i}," + ",".join(f"{r:.9f}" for r in residency) + f",{power:.6f}"
        )
    path = tmp_path / "runs.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_calibrate_fits_and_emits_a_loadable_calibration(runs_file, tmp_path, capsys):
    out_dir = tmp_path / "fit"
    assert main(["calibrate", "--runs", str(runs_file), "--out", str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert "model accuracy" in out
    fit_doc = json.loads((out_dir / "calibration_fit.json").read_text(encoding="utf-8"))
    assert fit_doc["fit"]["rank"] == 9
    assert fit_doc["accuracy"]["accuracy_pct"] == pytest.approx(100.0, abs=1e-6)
    assert len(fit_doc["residuals"]) == 24
    fitted = load_calibration(out_dir / "calibration_fitted.json")
    assert fitted.name == "fitted"
    default = load_calibration("default").conventional.state_power_mw
    for state, power in fitted.conventional.state_power_mw.items():
        assert power == pytest.approx(default[state], abs=1e-3)


def test_calibrate_under_determined_runs_exit_with_usage_error(tmp_path, capsys):
    path = tmp_path / "thin.csv"
    path.write_text(
        "label,C0,C8,power_mw\nonly,0.5,0.5,3612.5\n", encoding="utf-8"
    )
    assert main(["calibrate", "--runs", str(path)]) == 2
    assert "under-determined" in capsys.readouterr().err


# -- validate -------------------------------------------------------------------


def test_validate_accepts_a_good_configuration(capsys):
    assert main(["validate", "--preset", "4k60", "--scheme", "burstlink"]) == 0
    out = capsys.readouterr().out
    assert "configuration OK" in out
    assert "OK" in out.splitlines()[-1]


def test_validate_reports_violations_with_usage_exit(broken_config_file, capsys):
    assert main(["validate", "--config", str(broken_config_file)]) == 2
    assert "BURST_NEEDS_DRFB" in capsys.readouterr().err


def test_validate_grid_cross_checks_every_point(tmp_path, capsys):
    out_dir = tmp_path / "val"
    assert main(["validate", "--grid", "--out", str(out_dir)]) == 0
    doc = json.loads((out_dir / "validate.json").read_text(encoding="utf-8"))
    assert doc["ok"] is True
    assert len(doc["points"]) == 50
    assert doc["max_energy_deviation_pct"] < 0.1
    assert doc["max_residency_deviation_pp"] < 0.1


# -- presets / entry points --------------------------------------------------------


def test_presets_listing_names_every_builtin(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("fhd30", "4k60", "4k60-vr", "fhd30-ref-baseline"):
        assert name in out


def test_module_entry_point_reports_its_version():
    proc = subprocess.run(
        [sys.executable, "-m", "framewatt", "--version"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "framewatt" in proc.stdout
