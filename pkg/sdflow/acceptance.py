# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Acceptance suites.

The `engine` profile checks the simulator against its own bookkeeping, finer
steps, another integrator and closed-form solutions, and checks the front
end on every fixture.  The `model` profile checks the bundled model's
invariants and behavior patterns.
"""

import logging
import math
from pathlib import Path
import re
import time as timer

import numpy as np

from . import engine
from . import equilibrium
from . import formatter
from . import healthcare
from . import loader
from . import parser
from .patterns import PatternReport, PatternResult
from . import util


log = logging.getLogger(__name__)


FIXTURES_DIR = Path(__file__).parent / "fixtures"
ERRORS_DIR = FIXTURES_DIR / "errors"

PROFILES = ("engine", "model", "all")

CONSERVATION_RTOL = 1e-9
DT_HALVING_TOL = 0.005
METHOD_TOL = 0.01
ANALYTIC_TOL = 0.002
EQUILIBRIUM_TOL = 1e-8
ACCOUNTING_TOL = 1e-6
# Series whose largest magnitude is at or below this are rounding noise.
SERIES_FLOOR = 1e-6

_EXPECT_RE = re.compile(r"^//\s*expect:\s*(\w+)\s+(\d+):(\d+)\s*$", re.MULTILINE)


def _result(name, description, measured, band, passed, kind="engine"):
    return PatternResult(
        name=name,
        description=description,
        kind=kind,
        measured=float(measured),
        band=band,
        passed=bool(passed),
    )


def _load_fixture(name):
    return loader.require_model([FIXTURES_DIR / name])


def _sup_relative(reference, other):
    """
    Largest relative sup-norm difference over the series of two runs, leaving
    out series that never exceed `SERIES_FLOOR` in magnitude.
    """
    worst = 0.0
    for key, values in reference.series.items():
        scale = float(np.max(np.abs(values)))
        if scale <= SERIES_FLOOR:
            continue
        worst = max(worst, float(np.max(np.abs(other.series[key] - values))) / scale)
    return worst


def conservation_checks(runs):
    results = []
    for name, run in runs.items():
        report = engine.check_conservation(run)
        worst = max(
            (
                residual / report.scales[key]
                for key, residual in report.residuals.items()
            ),
            default=0.0,
        )
        results.append(
            _result(
                f"conservation_{name}",
                f"Every stock of '{name}' equals its initial value plus "
                f"integrated net flow plus recorded clipping.",
                worst,
                f"<= {util.format_float(CONSERVATION_RTOL)}",
                report.passed(CONSERVATION_RTOL),
            )
        )
    return results


def convergence_checks(model):
    """
    Halving dt and switching to rk4 barely change the saved series of a
    baseline run.
    """
    label = "baseline"
    spec = engine.RunSpec()
    reference = engine.simulate(model, spec, label)
    halved = engine.simulate(model, engine.RunSpec(dt=spec.dt / 2), label)
    rk4 = engine.simulate(model, engine.RunSpec(method="rk4"), label)

    dt_change = _sup_relative(reference, halved)
    method_change = _sup_relative(reference, rk4)
    return reference, [
        _result(
            f"dt_halving_{label}",
            f"Halving dt changes every saved series of '{label}' by less than "
            f"0.5%.",
            dt_change,
            f"< {util.format_float(DT_HALVING_TOL)}",
            dt_change < DT_HALVING_TOL,
        ),
        _result(
            f"euler_vs_rk4_{label}",
            f"Euler and rk4 runs of '{label}' agree within 1%.",
            method_change,
            f"< {util.format_float(METHOD_TOL)}",
            method_change < METHOD_TOL,
        ),
    ]


def _analytic(name, description, run, key, expected):
    final = float(run.series[key][-1])
    error = abs(final - expected) / abs(expected)
    return _result(
        name,
        description,
        error,
        f"< {util.format_float(ANALYTIC_TOL)}",
        error < ANALYTIC_TOL,
    )


def analytic_checks():
    runs = {}
    results = []

    decay = _load_fixture("decay.sdm")
    k = decay.parameters["decayRate"]
    for method in engine.Method:
        spec = engine.RunSpec(method=method)
        run = engine.simulate(decay, spec, f"decay_{method.value}")
        runs[run.scenario] = run
        results.append(
            _analytic(
                f"decay_{method.value}",
                f"Exponential decay with {method.value} matches the closed form "
                f"at year {spec.stop:g}.",
                run,
                "S",
                100.0 * math.exp(-k * spec.stop),
            )
        )

    chain = _load_fixture("chain.sdm")
    k1 = chain.parameters["k1"]
    k2 = chain.parameters["k2"]
    spec = engine.RunSpec(method=engine.Method.rk4)
    run = engine.simulate(chain, spec, "chain_rk4")
    runs[run.scenario] = run
    t = spec.stop
    results.append(
        _analytic(
            "chain_rk4",
            "The second stage of a two-stage chain matches the closed form at "
            f"year {t:g}.",
            run,
            "second",
            100.0 * k1 / (k2 - k1) * (math.exp(-k1 * t) - math.exp(-k2 * t)),
        )
    )

    balance = _load_fixture("balance.sdm")
    solution = equilibrium.solve_equilibrium(balance, balance.definition.equilibrium)
    arrivals = balance.parameters["arrivals"]
    residence = balance.parameters["residence"]
    expected = {
        "upstream": arrivals * residence,
        "downstream": arrivals / balance.parameters["k"],
    }
    error = max(abs(solution.values[key] - value) for key, value in expected.items())
    results.append(
        _result(
            "equilibrium_balance",
            "The equilibrium solver finds the analytic balance of a two-stage "
            "chain.",
            error,
            f"< {util.format_float(EQUILIBRIUM_TOL)}",
            error < EQUILIBRIUM_TOL,
        )
    )
    runs["balance"] = engine.simulate(
        balance.with_initials(solution.values), engine.RunSpec(), "balance"
    )
    return runs, results


def _format_text(text, source):
    result = parser.parse_text(text, source)
    list(result)
    return formatter.format_model(result.value)


def round_trip_checks(filepaths):
    """
    Formatting is a fixed point on every fixture.
    """
    results = []
    for filepath in filepaths:
        text = filepath.read_text(encoding="utf-8")
        once = _format_text(text, str(filepath))
        twice = _format_text(once, str(filepath))
        results.append(
            _result(
                f"round_trip_{filepath.stem}",
                f"Formatting {filepath.name} twice gives the same text as once.",
                0.0 if once == twice else 1.0,
                "== 0",
                once == twice,
            )
        )
    return results


def expected_diagnostics(text):
    """
    The `// expect: Code line:column` annotations of a seeded error file.
    """
    return [
        (code, int(line), int(column))
        for code, line, column in _EXPECT_RE.findall(text)
    ]


def _describe_expected(expected):
    return ", ".join(f"{code} at {line}:{column}" for code, line, column in expected)


def seeded_error_checks():
    results = []
    for filepath in sorted(ERRORS_DIR.glob("*.sdm")):
        text = filepath.read_text(encoding="utf-8")
        expected = expected_diagnostics(text)
        found = {
            (diagnostic.code, diagnostic.line, diagnostic.column)
            for diagnostic in loader.load_text(text, str(filepath))
            if diagnostic.is_error
        }
        missing = [item for item in expected if item not in found]
        results.append(
            _result(
                f"seeded_error_{filepath.stem}",
                f"{filepath.name} reports {_describe_expected(expected)}.",
                len(missing),
                "== 0",
                expected and not missing,
            )
        )
    return results


def engine_profile(calibration=None):
    started = timer.perf_counter()
    runs, results = analytic_checks()

    baseline, convergence = convergence_checks(healthcare.load(calibration))
    runs["bundled_baseline"] = baseline
    results.extend(convergence)

    results = conservation_checks(runs) + results

    fixtures = sorted(FIXTURES_DIR.glob("*.sdm")) + sorted(
        healthcare.MODEL_DIR.glob("*.sdm")
    )
    results.extend(round_trip_checks(fixtures))
    results.extend(seeded_error_checks())
    log.info("Engine profile took %.1f s", timer.perf_counter() - started)
    return results


def invariant_checks(model, runs):
    results = []
    worst_accounting = 0.0
    trust = (math.inf, -math.inf)
    performance = -math.inf
    for run in runs.values():
        worst_accounting = max(
            worst_accounting, *healthcare.population_accounting(run).values()
        )
        for values in run.family("trust").values():
            trust = (
                min(trust[0], float(np.min(values))),
                max(trust[1], float(np.max(values))),
            )
        for group, values in run.family("actualTPR").items():
            ceiling = model.parameters[f"maxAchievablePerformance[{group}]"]
            performance = max(performance, float(np.max(values)) - ceiling)

    lookups = model.definition.lookups
    steepest_drop = min(
        float(np.min(np.diff([y for _, y in lookups[name].points])))
        for name in healthcare.TRUST_EFFECTS
    )

    results.append(
        _result(
            "population_accounting",
            "Cumulative incidence equals the change of the in-system stocks plus "
            "cumulative deaths plus cumulative treated, in every run.",
            worst_accounting,
            f"< {util.format_float(ACCOUNTING_TOL)}",
            worst_accounting < ACCOUNTING_TOL,
            kind="invariant",
        )
    )
    results.append(
        _result(
            "trust_bounds",
            "Trust stays within [0, 1] in every run.",
            trust[0] if trust[0] < 0 else trust[1],
            "[0, 1]",
            trust[0] >= 0.0 and trust[1] <= 1.0,
            kind="invariant",
        )
    )
    results.append(
        _result(
            "performance_bound",
            "Actual algorithm performance never exceeds the achievable maximum.",
            performance,
            "<= 0",
            performance <= 1e-12,
            kind="invariant",
        )
    )
    results.append(
        _result(
            "monotone_trust_effects",
            "No effect of trust on care falls as trust rises.",
            steepest_drop,
            ">= 0",
            steepest_drop >= 0.0,
            kind="invariant",
        )
    )
    return results


def model_profile(calibration=None, threads=None):
    started = timer.perf_counter()
    model = healthcare.load(calibration)
    runs = healthcare.acceptance_runs(model, threads=threads)
    results = invariant_checks(model, runs)
    results.extend(healthcare.behavior_pattern_suite(runs).results)
    log.info("Model profile took %.1f s", timer.perf_counter() - started)
    return results


def run_acceptance(profile="all", calibration=None, threads=None):
    """
    Run the suites of `profile` and collect every check in one report.

    :raises ValueError: `profile` is not one of `PROFILES`.
    """
    if profile not in PROFILES:
        raise ValueError(
            f"Unknown profile '{profile}', expected one of {', '.join(PROFILES)}"
        )
    results = []
    if profile in ("engine", "all"):
        results.extend(engine_profile(calibration))
    if profile in ("model", "all"):
        results.extend(model_profile(calibration, threads))
    return PatternReport(results)
