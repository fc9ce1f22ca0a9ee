# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Equilibrium initialization: initial stock values for which the baseline run
starts in steady state.
"""

from dataclasses import dataclass, field
import logging
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .model import VariableKind
from . import engine
from . import util


log = logging.getLogger(__name__)


# Years of net flow applied per iteration, before damping.
ADJUSTMENT_TIME = 1.0


class NoConvergence(ValueError):
    def __init__(self, residual, iterations, stock):
        self.residual = residual
        self.iterations = iterations
        self.stock = stock
        super().__init__(
            f"no equilibrium after {iterations} iterations; best residual "
            f"{residual:.3g} (at '{stock}')"
        )


@dataclass(frozen=True)
class EquilibriumSpec:
    """
    What to solve.  `targets` and `frozen` name stock instances or whole stock
    families; stocks in neither set are held at their initial values.
    """

    targets: Tuple[str, ...]
    frozen: Mapping[str, float] = field(default_factory=dict)
    tolerance: float = 1e-8
    max_iterations: int = 10000
    damping: float = 0.5

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class EquilibriumSolution:
    values: Dict[str, float]
    residuals: Dict[str, float]
    iterations: int

    @property
    def residual(self):
        return max(self.residuals.values(), default=0.0)

    def table(self):
        template = util.get_jinja2_template("equilibrium.txt.jinja2")
        rows = [
            (key, self.values[key], self.residuals[key]) for key in self.values
        ]
        return template.render(rows=rows, iterations=self.iterations)


@dataclass
class EquilibriumReport:
    drifts: Dict[str, float]
    tolerance: float
    horizon: float

    @property
    def failures(self):
        return [key for key, drift in self.drifts.items() if not drift < self.tolerance]

    @property
    def passed(self):
        return not self.failures

    @property
    def worst(self):
        return max(self.drifts.values(), default=0.0)


def _stock_keys(model, names, what):
    keys = []
    for name in names:
        try:
            found = model.keys_for(name, kinds=(VariableKind.stock,))
        except KeyError:
            raise ValueError(f"Unknown {what} stock '{name}'")
        if not found:
            raise ValueError(f"{what.capitalize()} '{name}' is not a stock")
        keys.extend(found)
    return keys


def solve_equilibrium(model, spec, time=0.0):
    """
    Solve for target stock values with zero net flow by damped fixed-point
    iteration, ``S <- max(0, S + damping * 1 year * net flow)`` for
    non-negative stocks.

    Every non-target stock is held at its frozen or initial value, and
    parameters at their values at `time`.

    :raises NoConvergence: the relative residual ``|net| / max(|S|, 1)`` of
        some target is still above the tolerance after `max_iterations`.
    """
    targets = _stock_keys(model, spec.targets, "target")
    frozen = {}
    for name, value in spec.frozen.items():
        for key in _stock_keys(model, [name], "frozen"):
            frozen[key] = float(value)
    overlap = sorted(set(targets) & set(frozen))
    if overlap:
        raise ValueError(
            f"Stocks can not be both solved and frozen: {', '.join(overlap)}"
        )

    parameters = model.parameter_values(time)
    state = engine.initial_state(model, parameters, time)
    state.update(frozen)

    best = (np.inf, None)
    for iteration in range(1, spec.max_iterations + 1):
        values = engine.evaluate(model, state, time, parameters)
        net = engine.net_flows(model, values)
        residuals = {
            key: abs(net[key]) / max(abs(state[key]), 1.0) for key in targets
        }
        worst = max(residuals, key=residuals.get) if residuals else None
        residual = residuals[worst] if residuals else 0.0
        if residual < best[0]:
            best = (residual, worst)
        if residual <= spec.tolerance:
            log.debug("Equilibrium after %d iteration(s)", iteration)
            return EquilibriumSolution(
                {key: state[key] for key in targets}, residuals, iteration
            )
        for key in targets:
            value = state[key] + spec.damping * ADJUSTMENT_TIME * net[key]
            if model.stocks[key].nonneg:
                value = max(0.0, value)
            state[key] = value

    raise NoConvergence(best[0], spec.max_iterations, best[1])


def initialize(model):
    """
    Apply the model's declared `equilibrium` block, if any: solve it and
    return the model with the solved initial values.  Initial expressions of
    the other stocks are then evaluated against the solved stocks.
    """
    spec = model.definition.equilibrium
    if spec is None:
        return model
    solution = solve_equilibrium(model, spec)
    return model.with_initials(solution.values)


def verify_equilibrium(
    model, initials, horizon=20.0, tol=1e-6, metrics: Optional[Sequence[str]] = None
):
    """
    Simulate `horizon` years from `initials` without any overlays and report
    the largest drift of each checked series.

    By default the stocks in `initials` are checked, with drift relative to
    their initial value.  With `metrics` (families or instance keys), those
    series are checked with absolute drift.
    """
    model = model.without_overlays().with_initials(initials)
    spec = engine.RunSpec(start=0.0, stop=horizon)
    run = engine.simulate(model, spec, scenario="equilibrium")

    drifts = {}
    if metrics is None:
        for key in initials:
            values = run.series[key]
            scale = max(abs(values[0]), 1e-12)
            drifts[key] = float(np.max(np.abs(values - values[0]))) / scale
    else:
        for metric in metrics:
            for key in model.keys_for(metric):
                values = run.series[key]
                drifts[key] = float(np.max(np.abs(values - values[0])))
    return EquilibriumReport(drifts, tol, horizon)
