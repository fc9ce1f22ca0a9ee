# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Calibration of the bundled model's unpublished rate parameters.

A coordinate search scales one parameter at a time up and down by a step,
keeps any move that lowers the objective, and halves the step when no
parameter improves.  The objective is the sum over the caption targets of
``((measured - target) / half_width) ** 2``.
"""

from dataclasses import dataclass, replace
import logging
from pathlib import Path
from typing import Dict

from . import engine
from . import equilibrium
from . import formatter
from . import healthcare
from . import loader
from . import parser
from . import scenarios
from . import syntax
from . import util


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaptionTarget:
    name: str
    scenario: str
    metric: str
    group: str
    stop: float
    target: float
    half_width: float


TARGETS = (
    CaptionTarget(
        "screening_treated_gain",
        "increasedScreening",
        "fractionTreated",
        "blackAmericans",
        20.0,
        0.02,
        0.01,
    ),
    CaptionTarget(
        "screening_black_trust_gain",
        "increasedScreening",
        "trust",
        "blackAmericans",
        20.0,
        0.005,
        0.003,
    ),
    CaptionTarget(
        "screening_white_trust_constant",
        "increasedScreening",
        "trust",
        "whiteAmericans",
        20.0,
        0.0,
        0.001,
    ),
    CaptionTarget(
        "memory_treated_gain_year_40",
        "amplifyPositive",
        "fractionTreated",
        "blackAmericans",
        40.0,
        0.05,
        0.02,
    ),
)

TUNABLE = (
    "preScreenDeathAttribution",
    "preScreenMortality",
    "awaitMortality",
    "undetectedMortality",
    "samplesPerCaseHalfSaturation",
)

INITIAL_STEP = 0.2
MINIMUM_STEP = 0.01
MAX_EVALUATIONS = 200


@dataclass
class CalibrationResult:
    values: Dict[str, float]
    objective: float
    measured: Dict[str, float]
    evaluations: int


def measure(model, targets=TARGETS):
    """
    Start `model` in equilibrium, run what `targets` need, and return the
    gain over baseline of each target.
    """
    model = equilibrium.initialize(model)
    defined = model.definition.scenarios
    runs = {}
    for stop in sorted(set(target.stop for target in targets)):
        names = sorted(set(t.scenario for t in targets if t.stop == stop))
        spec = engine.RunSpec(stop=stop)
        results = scenarios.run_scenarios(
            model, spec, [defined[name] for name in names], threads=1
        )
        for name, result in results.items():
            runs[(name, stop)] = result

    measured = {}
    for target in targets:
        key = f"{target.metric}[{target.group}]"
        run = runs[(target.scenario, target.stop)]
        base = runs[(scenarios.BASELINE, target.stop)]
        measured[target.name] = run.at(key, target.stop) - base.at(key, target.stop)
    return measured


def objective(measured, targets=TARGETS):
    return sum(
        ((measured[t.name] - t.target) / t.half_width) ** 2 for t in targets
    )


def _evaluate(model, values, targets):
    try:
        measured = measure(model.with_parameters(values), targets)
    except (equilibrium.NoConvergence, scenarios.ScenarioRunError) as e:
        log.debug("Rejected %r: %s", values, e)
        return float("inf"), {}
    return objective(measured, targets), measured


def calibrate(
    model,
    tunable=TUNABLE,
    targets=TARGETS,
    step=INITIAL_STEP,
    minimum_step=MINIMUM_STEP,
    max_evaluations=MAX_EVALUATIONS,
):
    """
    Coordinate search from the current values of the `tunable` parameters of
    `model`, which must not have been initialized yet.

    :param tunable: parameter names or instance keys.
    """
    keys = []
    for name in tunable:
        keys.extend(model.keys_for(name))
    values = {key: model.parameters[key] for key in keys}

    best, measured = _evaluate(model, values, targets)
    evaluations = 1
    log.info("Starting objective %.6g", best)

    while step >= minimum_step and evaluations < max_evaluations:
        improved = False
        for key in keys:
            for factor in (1.0 + step, 1.0 - step):
                if evaluations >= max_evaluations:
                    break
                candidate = dict(values)
                candidate[key] = values[key] * factor
                score, candidate_measured = _evaluate(model, candidate, targets)
                evaluations += 1
                if score < best:
                    values, best, measured = candidate, score, candidate_measured
                    improved = True
                    log.info("%s -> %.6g: objective %.6g", key, values[key], best)
                    break
        if not improved:
            step /= 2.0
            log.debug("Step halved to %g", step)

    return CalibrationResult(values, best, measured, evaluations)


def _number(value):
    return syntax.Number(value, util.format_float(value))


def _updated(decl, values):
    if decl.value is not None:
        if decl.name in values:
            return replace(decl, value=_number(values[decl.name]))
        return decl
    per_element = []
    changed = False
    for element, number in decl.per_element:
        key = f"{decl.name}[{element}]"
        if key in values:
            number = _number(values[key])
            changed = True
        per_element.append((element, number))
    if changed:
        return replace(decl, per_element=tuple(per_element))
    return decl


def rewrite_calibration(source, values):
    """
    The text of calibration file `source` with the parameters in `values`
    (instance keys) set, in canonical format.

    :raises loader.ModelError: `source` does not parse.
    """
    source = Path(source)
    result = parser.parse_text(source.read_text(encoding="utf-8"), str(source))
    errors = [diagnostic for diagnostic in result if diagnostic.is_error]
    if errors:
        raise loader.ModelError(errors)
    model = result.value
    declarations = tuple(
        _updated(decl, values) if isinstance(decl, syntax.ParameterDecl) else decl
        for decl in model.declarations
    )
    return formatter.format_model(replace(model, declarations=declarations))


def run_calibration(out, calibration=None, max_evaluations=MAX_EVALUATIONS):
    """
    Calibrate the bundled model, starting from `calibration` or the shipped
    file, and write the result to `out`.
    """
    source = healthcare.CALIBRATION_FILE
    if calibration is not None:
        source = Path(calibration)
    model = loader.require_model(healthcare.bundled_files(source))
    result = calibrate(model, max_evaluations=max_evaluations)
    Path(out).write_text(rewrite_calibration(source, result.values), encoding="utf-8")
    return result
