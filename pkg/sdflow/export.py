# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Writing and reading run outputs: series CSV files, the run manifest, delta
tables and comparison charts.

Every output is byte-deterministic for identical inputs.
"""

import csv
import hashlib
import io
import json
from pathlib import Path
import shutil
import tempfile

import numpy as np

from .engine import RunResult
from .model import TIME
from . import util


PANE_WIDTH = 320
PANE_HEIGHT = 180
MARGIN_LEFT = 80
MARGIN_TOP = 60
GAP_X = 100
GAP_Y = 90
TICKS = 5


def _csv_text(rows):
    fd = io.StringIO()
    writer = csv.writer(fd, lineterminator="\n")
    writer.writerows(rows)
    return fd.getvalue()


def run_to_csv(run):
    """
    One row per saved time, one column per variable instance, with the
    `time` column first.
    """
    keys = list(run.series)
    rows = [[TIME] + keys]
    for index, time in enumerate(run.times):
        rows.append(
            [util.format_float(time)]
            + [util.format_float(run.series[key][index]) for key in keys]
        )
    return _csv_text(rows)


def read_csv(filepath):
    """
    Read a series CSV written by `run_to_csv` back into a `RunResult` named
    after the file.

    :raises ValueError: the file is not a series CSV.
    """
    filepath = Path(filepath)
    with open(filepath, "r", encoding="utf-8", newline="") as fd:
        rows = list(csv.reader(fd))
    if not rows or not rows[0] or rows[0][0] != TIME:
        raise ValueError(
            util.format_error(filepath, "", f"the first column must be '{TIME}'")
        )
    header = rows[0]
    try:
        data = np.array([[float(cell) for cell in row] for row in rows[1:]])
    except ValueError as e:
        raise ValueError(util.format_error(filepath, "", str(e)))
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise ValueError(
            util.format_error(filepath, "", "rows do not match the header")
        )
    series = {key: data[:, column] for column, key in enumerate(header) if column}
    return RunResult(times=data[:, 0], series=series, scenario=filepath.stem)


def _sha256(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def manifest(runs, csv_texts, model_files):
    """
    The manifest of a set of runs: for each run its name, file, run spec and
    content hash, plus a hash over the model files.
    """
    entries = []
    for name in sorted(runs):
        run = runs[name]
        entries.append(
            {
                "name": name,
                "file": f"{name}.csv",
                "spec": run.spec.to_dict() if run.spec is not None else None,
                "rows": int(len(run.times)),
                "sha256": _sha256(csv_texts[name]),
            }
        )
    content = {
        "model": {
            "files": [Path(filepath).name for filepath in model_files],
            "sha256": util.content_hash(model_files),
        },
        "runs": entries,
    }
    return json.dumps(content, indent=2, sort_keys=True) + "\n"


def output_runs(runs, model_files, output_dir):
    """
    Write one CSV per run plus `manifest.json` into `output_dir`.
    """
    texts = {name: run_to_csv(run) for name, run in runs.items()}
    for name, text in texts.items():
        (output_dir / f"{name}.csv").write_text(text, encoding="utf-8")
    (output_dir / "manifest.json").write_text(
        manifest(runs, texts, model_files), encoding="utf-8"
    )


def write_transactionally(output_dir, outputter):
    """
    Call `outputter` with a temporary directory, then move what it wrote to
    `output_dir`, replacing what was there.
    """
    output_dir = Path(output_dir)
    with tempfile.TemporaryDirectory() as tempdir:
        outputter(Path(tempdir))

        if output_dir.is_file():
            output_dir.unlink()
        elif output_dir.is_dir():
            shutil.rmtree(output_dir)

        shutil.copytree(tempdir, output_dir)


def deltas_to_csv(reports):
    rows = [["metric", "group", "time", "baseline", "scenario", "absolute", "relative"]]
    for report in reports:
        rows.append(
            [report.metric, report.group]
            + [
                util.format_float(value)
                for value in (
                    report.time,
                    report.baseline,
                    report.scenario,
                    report.absolute,
                    report.relative,
                )
            ]
        )
    return _csv_text(rows)


def deltas_table(reports, baseline="baseline", scenario="scenario"):
    template = util.get_jinja2_template("deltas.txt.jinja2")
    return template.render(reports=reports, baseline=baseline, scenario=scenario)


def patterns_to_csv(report):
    rows = [["name", "kind", "measured", "band", "verdict"]]
    for result in report.results:
        rows.append(
            [
                result.name,
                result.kind,
                util.format_float(result.measured),
                result.band,
                result.verdict,
            ]
        )
    return _csv_text(rows)


def _coordinate(value):
    return f"{value:.2f}"


def _ticks(low, high, scale):
    return [
        {"position": _coordinate(scale(value)), "label": f"{value:.4g}"}
        for value in np.linspace(low, high, TICKS)
    ]


def _pane(metric, key, baseline, scenario, x, y):
    times = baseline.times
    first = baseline.series[key]
    second = scenario.series[key]
    t0, t1 = float(times[0]), float(times[-1])
    if t1 <= t0:
        t1 = t0 + 1.0
    low = float(min(np.min(first), np.min(second)))
    high = float(max(np.max(first), np.max(second)))
    if high - low < 1e-12:
        pad = max(abs(low) * 0.01, 1e-6)
        low, high = low - pad, high + pad

    def scale_x(t):
        return (t - t0) / (t1 - t0) * PANE_WIDTH

    def scale_y(v):
        return PANE_HEIGHT - (v - low) / (high - low) * PANE_HEIGHT

    def points(values):
        return " ".join(
            f"{_coordinate(scale_x(t))},{_coordinate(scale_y(v))}"
            for t, v in zip(times, values)
        )

    return {
        "x": x,
        "y": y,
        "width": PANE_WIDTH,
        "height": PANE_HEIGHT,
        "title": key,
        "metric": metric,
        "xticks": _ticks(t0, t1, scale_x),
        "yticks": _ticks(low, high, scale_y),
        "baseline": points(first),
        "scenario": points(second),
    }


def comparison_svg(baseline, scenario, reports):
    """
    Line charts of every series named in `reports`: one row of panes per
    metric, one pane per group, baseline solid and scenario dashed.
    """
    layout = {}
    for report in reports:
        layout.setdefault(report.metric, [])
        if report.key not in layout[report.metric]:
            layout[report.metric].append(report.key)

    panes = []
    columns = max((len(keys) for keys in layout.values()), default=1)
    for row, (metric, keys) in enumerate(layout.items()):
        for column, key in enumerate(keys):
            panes.append(
                _pane(
                    metric,
                    key,
                    baseline,
                    scenario,
                    MARGIN_LEFT + column * (PANE_WIDTH + GAP_X),
                    MARGIN_TOP + row * (PANE_HEIGHT + GAP_Y),
                )
            )

    template = util.get_jinja2_template("compare.svg.jinja2")
    return template.render(
        width=MARGIN_LEFT + columns * (PANE_WIDTH + GAP_X),
        height=MARGIN_TOP + max(len(layout), 1) * (PANE_HEIGHT + GAP_Y),
        baseline=baseline.scenario,
        scenario=scenario.scenario,
        panes=panes,
    )
