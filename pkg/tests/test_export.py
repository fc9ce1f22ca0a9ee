# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

import json
from pathlib import Path

import numpy as np
import pytest

from sdflow import acceptance
from sdflow import engine
from sdflow import export
from sdflow import patterns
from sdflow import scenarios
from sdflow import util as sd_util

import util


TIMES = [0.0, 0.5, 1.0]


def _pair():
    baseline = util.make_run(TIMES, level__a=[1.0, 1.0, 1.0], level__b=[2.0, 2.0, 2.0])
    policy = util.make_run(
        TIMES, scenario="policy", level__a=[1.0, 1.5, 2.0], level__b=[2.0, 2.0, 2.5]
    )
    return baseline, policy


def test_format_float():
    assert sd_util.format_float(0.0) == "0"
    assert sd_util.format_float(-0.0) == "0"
    assert sd_util.format_float(1.5) == "1.5"
    assert sd_util.format_float(10.0) == "10"
    assert sd_util.format_float(1.0 / 3.0) == "0.333333333"


def test_run_to_csv():
    run = util.make_run(TIMES, x=[0.0, 0.25, 1.0], s__a=[3.0, 2.5, 2.0])
    assert export.run_to_csv(run) == (
        "time,x,s[a]\n" "0,0,3\n" "0.5,0.25,2.5\n" "1,1,2\n"
    )


def test_read_csv(tmpdir):
    run = util.make_run(TIMES, x=[0.0, 0.25, 1.0], s__a=[3.0, 2.5, 2.0])
    path = Path(str(tmpdir)) / "policy.csv"
    path.write_text(export.run_to_csv(run), encoding="utf-8")

    read = export.read_csv(path)
    assert read.scenario == "policy"
    assert list(read.series) == ["x", "s[a]"]
    assert np.array_equal(read.times, run.times)
    assert np.array_equal(read.series["s[a]"], run.series["s[a]"])


def test_read_csv_errors(tmpdir):
    tmpdir = Path(str(tmpdir))
    no_time = tmpdir / "no_time.csv"
    no_time.write_text("x,y\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="first column must be 'time'"):
        export.read_csv(no_time)

    bad_cell = tmpdir / "bad_cell.csv"
    bad_cell.write_text("time,x\n0,oops\n", encoding="utf-8")
    with pytest.raises(ValueError, match="oops"):
        export.read_csv(bad_cell)

    empty = tmpdir / "empty.csv"
    empty.write_text("time,x\n", encoding="utf-8")
    with pytest.raises(ValueError, match="rows do not match"):
        export.read_csv(empty)


def test_manifest():
    model_files = [acceptance.FIXTURES_DIR / "decay.sdm"]
    model = util.load((acceptance.FIXTURES_DIR / "decay.sdm").read_text())
    runs = {"baseline": engine.simulate(model, engine.RunSpec(stop=1.0))}
    texts = {"baseline": export.run_to_csv(runs["baseline"])}

    text = export.manifest(runs, texts, model_files)
    assert text == export.manifest(runs, texts, model_files)
    content = json.loads(text)
    assert content["model"]["files"] == ["decay.sdm"]
    assert content["model"]["sha256"] == sd_util.content_hash(model_files)
    [entry] = content["runs"]
    assert entry["name"] == "baseline"
    assert entry["file"] == "baseline.csv"
    assert entry["rows"] == 5
    assert entry["spec"]["stop"] == 1.0
    assert entry["spec"]["method"] == "euler"


def test_output_runs_transactionally(tmpdir):
    output_dir = Path(str(tmpdir)) / "out"
    output_dir.mkdir()
    (output_dir / "stale.csv").write_text("old", encoding="utf-8")

    baseline, policy = _pair()
    runs = {"baseline": baseline, "policy": policy}
    export.write_transactionally(
        output_dir,
        lambda tempdir: export.output_runs(
            runs, [acceptance.FIXTURES_DIR / "decay.sdm"], tempdir
        ),
    )
    assert sorted(p.name for p in output_dir.iterdir()) == [
        "baseline.csv",
        "manifest.json",
        "policy.csv",
    ]
    content = json.loads((output_dir / "manifest.json").read_text())
    assert [entry["name"] for entry in content["runs"]] == ["baseline", "policy"]
    assert content["runs"][0]["spec"] is None


def test_deltas():
    baseline, policy = _pair()
    reports = scenarios.compare(baseline, policy, ["level"], [1.0])
    assert export.deltas_to_csv(reports) == (
        "metric,group,time,baseline,scenario,absolute,relative\n"
        "level,a,1,1,2,1,1\n"
        "level,b,1,2,2.5,0.5,0.25\n"
    )

    table = export.deltas_table(reports, baseline="baseline", scenario="policy")
    lines = table.strip().splitlines()
    assert lines[0].split() == [
        "metric",
        "time",
        "baseline",
        "policy",
        "delta",
        "relative",
    ]
    assert lines[1].split() == ["level[a]", "1", "1", "2", "1", "1"]
    assert lines[2].split() == ["level[b]", "1", "2", "2.5", "0.5", "0.25"]


def test_patterns_to_csv():
    baseline, policy = _pair()
    loaded = [
        patterns.Pattern.make(
            "gain",
            dict(
                kind="delta",
                description="Policy raises level[a].",
                run="policy",
                baseline="baseline",
                metric="level",
                group="a",
                at=1,
                band=[0.5, 1.5],
            ),
        )
    ]
    report = patterns.behavior_pattern_suite(
        {"baseline": baseline, "policy": policy}, loaded
    )
    assert export.patterns_to_csv(report) == (
        "name,kind,measured,band,verdict\n" 'gain,delta,1,"[0.5, 1.5]",PASS\n'
    )


def test_comparison_svg():
    baseline, policy = _pair()
    reports = scenarios.compare(baseline, policy, ["level"], [1.0])
    svg = export.comparison_svg(baseline, policy, reports)
    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert svg.rstrip().endswith("</svg>")
    assert "baseline (solid) vs policy (dashed)" in svg
    assert svg.count("<polyline") == 4
    assert "Level [a]" in svg
    assert "Level [b]" in svg
    # Two panes side by side in one row.
    assert 'width="920"' in svg
    assert svg == export.comparison_svg(baseline, policy, reports)
