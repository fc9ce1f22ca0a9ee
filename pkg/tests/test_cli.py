# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

"""Tests for the command line interface."""

import json
import os
from pathlib import Path

from click.testing import CliRunner

from sdflow import __main__
from sdflow import acceptance
from sdflow import healthcare


DECAY = str(acceptance.FIXTURES_DIR / "decay.sdm")
BALANCE = str(acceptance.FIXTURES_DIR / "balance.sdm")


def test_basic_help():
    """Test the CLI."""
    runner = CliRunner()
    help_result = runner.invoke(__main__.main, ["--help"])
    assert help_result.exit_code == 0
    assert "Show this message and exit." in help_result.output
    assert "-v, --verbose" in help_result.output
    for command in ("validate", "run", "compare", "acceptance", "fmt"):
        assert command in help_result.output


def test_validate_bundled():
    runner = CliRunner()
    files = [str(path) for path in healthcare.bundled_files()]
    result = runner.invoke(__main__.main, ["validate"] + files)
    assert result.exit_code == 0


def test_validate_reports_errors():
    runner = CliRunner()
    result = runner.invoke(
        __main__.main,
        ["validate", str(acceptance.ERRORS_DIR / "undefined_reference.sdm")],
    )
    assert result.exit_code == 1
    assert "undefined_reference.sdm:4:18: error: undefined reference 'rate'" in (
        result.output
    )


def test_validate_missing_file(tmpdir):
    runner = CliRunner()
    result = runner.invoke(
        __main__.main, ["validate", str(tmpdir / "does_not_exist.sdm")]
    )
    assert result.exit_code == 2


def test_run(tmpdir):
    runner = CliRunner()
    result = runner.invoke(__main__.main, ["run", DECAY, "-o", str(tmpdir)])
    assert result.exit_code == 0, result.output
    assert "baseline: 81 rows" in result.output
    assert set(os.listdir(tmpdir)) == {"baseline.csv", "manifest.json"}
    with open(tmpdir / "baseline.csv") as fd:
        lines = fd.read().splitlines()
    assert len(lines) == 82
    assert lines[0].startswith("time,")
    assert lines[1].split(",")[0] == "0"
    assert lines[-1].split(",")[0] == "20"


def test_run_rejects_bad_dt(tmpdir):
    runner = CliRunner()
    result = runner.invoke(
        __main__.main, ["run", DECAY, "--dt", "0.3", "-o", str(tmpdir)]
    )
    assert result.exit_code == 2
    assert "not an integer multiple" in result.output


def test_run_overrides(tmpdir):
    runner = CliRunner()
    result = runner.invoke(
        __main__.main,
        ["run", DECAY, "--set", "decayRate=0", "--stop", "1", "-o", str(tmpdir)],
    )
    assert result.exit_code == 0, result.output
    with open(tmpdir / "baseline.csv") as fd:
        lines = fd.read().splitlines()
    column = lines[0].split(",").index("S")
    assert lines[-1].split(",")[column] == "100"

    content = json.loads((Path(str(tmpdir)) / "manifest.json").read_text())
    assert content["runs"][0]["spec"]["overrides"] == {"decayRate": 0.0}


def test_run_unknown_scenario(tmpdir):
    runner = CliRunner()
    result = runner.invoke(
        __main__.main, ["run", DECAY, "--scenario", "nothing", "-o", str(tmpdir)]
    )
    assert result.exit_code == 2
    assert "Unknown scenario(s): nothing" in result.output


def test_run_all_scenarios(tmpdir):
    runner = CliRunner()
    result = runner.invoke(
        __main__.main, ["run", "--scenario", "all", "-o", str(tmpdir)]
    )
    assert result.exit_code == 0, result.output
    assert set(os.listdir(tmpdir)) == {
        "baseline.csv",
        "increasedScreening.csv",
        "amplifyPositive.csv",
        "dataCollectionAverage.csv",
        "dataCollectionGroup.csv",
        "manifest.json",
    }
    content = json.loads((Path(str(tmpdir)) / "manifest.json").read_text())
    assert content["model"]["files"] == [
        "healthcare_ai.sdm",
        "calibration.sdm",
        "scenarios.sdm",
    ]


def test_compare(tmpdir):
    runner = CliRunner()
    first = tmpdir / "first"
    second = tmpdir / "second"
    for out, rate in ((first, "0.05"), (second, "0.1")):
        result = runner.invoke(
            __main__.main,
            ["run", DECAY, "--set", f"decayRate={rate}", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output

    svg = tmpdir / "compare.svg"
    csv_path = tmpdir / "deltas.csv"
    result = runner.invoke(
        __main__.main,
        [
            "compare",
            str(first / "baseline.csv"),
            str(second / "baseline.csv"),
            "-m",
            "S",
            "--at",
            "10",
            "--at",
            "20",
            "--svg",
            str(svg),
            "--csv",
            str(csv_path),
        ],
    )
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0].split()[0] == "metric"
    assert [line.split()[:2] for line in lines[1:]] == [["S", "10"], ["S", "20"]]
    assert os.path.isfile(svg)
    with open(csv_path) as fd:
        assert fd.readline().startswith("metric,group,time")


def test_compare_unknown_metric(tmpdir):
    runner = CliRunner()
    result = runner.invoke(__main__.main, ["run", DECAY, "-o", str(tmpdir)])
    assert result.exit_code == 0
    baseline = str(tmpdir / "baseline.csv")
    result = runner.invoke(
        __main__.main, ["compare", baseline, baseline, "-m", "missing"]
    )
    assert result.exit_code == 1
    assert "Unknown metric 'missing'" in result.output


def test_fmt_check(tmpdir):
    runner = CliRunner()
    result = runner.invoke(__main__.main, ["fmt", "--check", DECAY, BALANCE])
    assert result.exit_code == 0

    messy = tmpdir / "messy.sdm"
    messy.write_text("parameter   k=1\nflow f = ((k))*2\n", encoding="utf-8")
    result = runner.invoke(__main__.main, ["fmt", "--check", str(messy)])
    assert result.exit_code == 1
    assert "would reformat" in result.output

    result = runner.invoke(__main__.main, ["fmt", str(messy)])
    assert result.exit_code == 0
    assert "parameter k = 1" in result.output
    assert "flow f = k * 2" in result.output

    result = runner.invoke(__main__.main, ["fmt", "--write", str(messy)])
    assert result.exit_code == 0
    result = runner.invoke(__main__.main, ["fmt", "--check", str(messy)])
    assert result.exit_code == 0


def test_equilibrium():
    runner = CliRunner()
    result = runner.invoke(__main__.main, ["equilibrium", BALANCE])
    assert result.exit_code == 0, result.output
    assert "upstream" in result.output
    assert "Largest relative drift over 20 years" in result.output


def test_equilibrium_without_block():
    runner = CliRunner()
    result = runner.invoke(__main__.main, ["equilibrium", DECAY])
    assert result.exit_code == 1
    assert "no equilibrium block" in result.output


def test_acceptance_engine_profile(tmpdir):
    runner = CliRunner()
    report_csv = tmpdir / "report.csv"
    result = runner.invoke(
        __main__.main,
        ["acceptance", "--profile", "engine", "--report-csv", str(report_csv)],
    )
    assert result.exit_code == 0, result.output
    assert "PASS  decay_euler" in result.output
    with open(report_csv) as fd:
        assert fd.readline().strip() == "name,kind,measured,band,verdict"


def test_acceptance_model_profile_reports_failures(tmpdir):
    text = healthcare.CALIBRATION_FILE.read_text(encoding="utf-8")
    flat = {
        "trustScreenEffect": "[(0, 1), (1, 1)]",
        "trustTreatEffect": "[(0, 1), (1, 1)]",
        "followUpEffect": "[(0, 0.5), (1, 0.5)]",
    }
    lines = []
    for line in text.splitlines():
        for name, points in flat.items():
            if line.startswith(f"lookup {name} = "):
                line = f"lookup {name} = {points}"
        lines.append(line)
    calibration = tmpdir / "trust_free.sdm"
    calibration.write_text("\n".join(lines) + "\n", encoding="utf-8")

    runner = CliRunner()
    result = runner.invoke(
        __main__.main,
        [
            "acceptance",
            "--profile",
            "model",
            "--calibration",
            str(calibration),
            "--threads",
            "1",
        ],
    )
    assert result.exit_code == 1, result.output
    assert "FAIL  memory_treated_gain_year_40" in result.output
    assert "PASS  monotone_trust_effects" in result.output
    summary = result.output.strip().splitlines()[-1]
    assert "pattern(s) failed:" in summary
    assert "memory_treated_gain_year_40" in summary
