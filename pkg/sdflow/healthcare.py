# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
The bundled model of algorithmic diagnosis, trust and treatment for Black and
White Americans: its files, reported metrics and acceptance runs.
"""

import logging
from pathlib import Path

import numpy as np

from . import engine
from . import equilibrium
from . import loader
from . import patterns
from . import scenarios


log = logging.getLogger(__name__)


MODEL_DIR = Path(__file__).parent / "model"
MODEL_FILE = MODEL_DIR / "healthcare_ai.sdm"
CALIBRATION_FILE = MODEL_DIR / "calibration.sdm"
SCENARIOS_FILE = MODEL_DIR / "scenarios.sdm"
PATTERNS_FILE = MODEL_DIR / "patterns.yaml"

GROUPS = ("blackAmericans", "whiteAmericans")

METRICS = ("fractionTreated", "trust", "perceivedTPR", "actualTPR", "deathRate")

# Lookups through which trust acts on screening, treatment and follow-up.
TRUST_EFFECTS = ("trustScreenEffect", "trustTreatEffect", "followUpEffect")

IN_SYSTEM_STOCKS = (
    "undiagnosed",
    "beingScreened",
    "diagnosedAwaitingTreatment",
    "undetectedProgressing",
    "awaitingLateTreatment",
    "inTreatmentEarly",
    "inTreatmentLate",
)

POLICIES = (
    "increasedScreening",
    "amplifyPositive",
    "dataCollectionAverage",
    "dataCollectionGroup",
)

# Scenarios also run, with the baseline, over a longer horizon; these runs
# are named `<scenario>@<years>`.
LONG_HORIZON = 40.0
LONG_RUN_SCENARIOS = ("amplifyPositive",)


def bundled_files(calibration=None):
    """
    The model, calibration and scenario files, in load order.

    :param calibration: path of a calibration file replacing the shipped one.
    """
    return [
        MODEL_FILE,
        Path(calibration) if calibration is not None else CALIBRATION_FILE,
        SCENARIOS_FILE,
    ]


def load(calibration=None):
    """
    Load the bundled model and start it in equilibrium.

    :raises loader.ModelError: the files do not load.
    :raises equilibrium.NoConvergence: the calibration has no equilibrium.
    """
    model = loader.require_model(bundled_files(calibration))
    return equilibrium.initialize(model)


def metrics(run):
    """
    The reported metrics of a run of the bundled model, as
    ``{metric: {group: series}}``.
    """
    return {name: run.family(name) for name in METRICS}


def population_accounting(run):
    """
    Per group, the largest gap over the run between cumulative incidence and
    the people it must be accounted for by: the change of the in-system stocks
    plus cumulative deaths plus cumulative treated.
    """
    residuals = {}
    for group in GROUPS:
        series = run.series
        accounted = series[f"cumulativeDeaths[{group}]"] + series[
            f"cumulativeTreated[{group}]"
        ]
        for stock in IN_SYSTEM_STOCKS:
            values = series[f"{stock}[{group}]"]
            accounted = accounted + (values - values[0])
        incidence = series[f"cumulativeIncidence[{group}]"]
        scale = max(1.0, float(np.max(np.abs(incidence))))
        residuals[group] = float(np.max(np.abs(incidence - accounted))) / scale
    return residuals


def acceptance_runs(model, threads=None, spec=None):
    """
    Every run the behavior patterns need: the baseline and the four policies
    over the horizon of `spec`, plus the baseline and `LONG_RUN_SCENARIOS` over
    `LONG_HORIZON` years.
    """
    spec = spec or engine.RunSpec()
    defined = model.definition.scenarios
    missing = [
        name for name in POLICIES + LONG_RUN_SCENARIOS if name not in defined
    ]
    if missing:
        raise scenarios.UnknownTarget(f"Unknown scenario(s): {', '.join(missing)}")

    runs = scenarios.run_scenarios(
        model, spec, [defined[name] for name in POLICIES], threads=threads
    )
    long_spec = engine.RunSpec(
        start=spec.start,
        stop=LONG_HORIZON,
        dt=spec.dt,
        method=spec.method,
        save_interval=spec.save_interval,
    )
    long_jobs = [defined[name] for name in LONG_RUN_SCENARIOS]
    long_runs = scenarios.run_scenarios(model, long_spec, long_jobs, threads=threads)
    for name, result in long_runs.items():
        runs[f"{name}@{LONG_HORIZON:g}"] = result
    log.info("Ran %d acceptance run(s)", len(runs))
    return runs


def bundled_patterns():
    return patterns.read_patterns(PATTERNS_FILE)


def behavior_pattern_suite(runs, pattern_list=None):
    """
    Evaluate the bundled behavior patterns (or `pattern_list`) on `runs`.

    :raises patterns.MissingRun: a pattern needs a run that is not in `runs`.
    """
    if pattern_list is None:
        pattern_list = bundled_patterns()
    return patterns.behavior_pattern_suite(runs, pattern_list)
