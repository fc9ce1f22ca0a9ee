# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Fixed-step simulation of compiled stock-and-flow models.
"""

from dataclasses import dataclass, field
import enum
import logging
import math
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .model import TIME, VariableKind, split_key


log = logging.getLogger(__name__)


DIVISION_EPSILON = 1e-12


class NonFiniteValue(ValueError):
    """
    An equation evaluated to NaN or infinity, or could not be evaluated.
    """

    def __init__(self, variable, time, detail=None):
        self.variable = variable
        self.time = time
        message = f"'{variable}' is not finite at t={time:g}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class RunSpecError(ValueError):
    pass


class Method(enum.Enum):
    euler = "euler"
    rk4 = "rk4"


def _is_multiple(value, step):
    ratio = value / step
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio))


@dataclass(frozen=True)
class RunSpec:
    start: float = 0.0
    stop: float = 20.0
    dt: float = 0.0625
    method: Method = Method.euler
    save_interval: float = 0.25
    overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.method, str):
            try:
                object.__setattr__(self, "method", Method(self.method))
            except ValueError:
                raise RunSpecError(
                    f"Unknown integration method '{self.method}', "
                    f"expected one of {', '.join(m.value for m in Method)}"
                )
        if not self.dt > 0:
            raise RunSpecError(f"dt must be positive, got {self.dt}")
        if not self.stop > self.start:
            raise RunSpecError(
                f"stop time {self.stop} must be after start time {self.start}"
            )
        if not _is_multiple(self.save_interval, self.dt):
            raise RunSpecError(
                f"save interval {self.save_interval} is not an integer "
                f"multiple of dt {self.dt}"
            )
        if not _is_multiple(self.stop - self.start, self.save_interval):
            raise RunSpecError(
                f"run length {self.stop - self.start} is not a multiple of "
                f"the save interval {self.save_interval}"
            )

    @property
    def steps(self):
        return int(round((self.stop - self.start) / self.dt))

    @property
    def save_every(self):
        return int(round(self.save_interval / self.dt))

    def to_dict(self):
        return {
            "start": self.start,
            "stop": self.stop,
            "dt": self.dt,
            "method": self.method.value,
            "save_interval": self.save_interval,
            "overrides": dict(sorted(self.overrides.items())),
        }


@dataclass
class RunResult:
    """
    Saved trajectories of one run.

    `net_integrals` and `clipped` hold, per stock and saved time, the running
    sums of ``dt * net flow`` and of the amounts added by clamping, as the
    integrator computed them.
    """

    times: np.ndarray
    series: Dict[str, np.ndarray]
    spec: Optional[RunSpec] = None
    scenario: str = "baseline"
    stocks: Tuple[str, ...] = ()
    net_integrals: Dict[str, np.ndarray] = field(default_factory=dict)
    clipped: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def variables(self):
        return list(self.series)

    def family(self, name):
        """
        Series of every instance of `name`, keyed by element label
        (``""`` for scalars).
        """
        found = {}
        for key, values in self.series.items():
            family, elements = split_key(key)
            if family == name:
                found[",".join(elements)] = values
        return found

    def families(self):
        return sorted(set(split_key(key)[0] for key in self.series))

    def index_of(self, time):
        index = int(np.argmin(np.abs(self.times - time)))
        if not math.isclose(self.times[index], time, rel_tol=0, abs_tol=1e-9):
            raise KeyError(f"t={time:g} is not a saved time")
        return index

    def at(self, key, time):
        return float(self.series[key][self.index_of(time)])


@dataclass
class StepResult:
    state: Dict[str, float]
    net: Dict[str, float]
    clipped: Dict[str, float]


def eval_lookup(table, x):
    """
    Piecewise-linear interpolation in `table`, clamped to the end values.
    """
    return table(x)


def safe_divide(num, den, fallback):
    if abs(den) > DIVISION_EPSILON:
        return num / den
    return fallback


def _checked(key, function, values, time):
    try:
        value = function(values)
    except (ZeroDivisionError, OverflowError, ValueError) as e:
        raise NonFiniteValue(key, time, str(e)) from e
    if not math.isfinite(value):
        raise NonFiniteValue(key, time)
    return value


def evaluate(model, state, time, parameters):
    """
    Values of every instance (parameters, stocks, auxiliaries and flows) for
    the given stock `state` at `time`.
    """
    values = dict(parameters)
    values.update(state)
    values[TIME] = time
    for key in model.order:
        values[key] = _checked(key, model.equations[key], values, time)
    return values


def net_flows(model, values):
    return {
        key: math.fsum(values[flow] for flow in plan.inflows)
        - math.fsum(values[flow] for flow in plan.outflows)
        for key, plan in model.stocks.items()
    }


def initial_state(model, parameters, time=0.0):
    """
    Initial stock values: solved or overridden initials where the model has
    them, otherwise each stock's initial expression.
    """
    values = dict(parameters)
    values[TIME] = time
    for key in model.init_order:
        if key in model.stocks:
            if key in model.initials:
                values[key] = float(model.initials[key])
            else:
                values[key] = _checked(key, model.stocks[key].initial, values, time)
        else:
            values[key] = _checked(key, model.equations[key], values, time)
    return {key: values[key] for key in model.stocks}


def _clamp(model, state):
    clipped = {}
    for key, plan in model.stocks.items():
        value = state[key]
        if plan.nonneg and value < 0.0:
            clipped[key] = -value
            state[key] = 0.0
        elif plan.upper is not None and value > plan.upper:
            clipped[key] = plan.upper - value
            state[key] = plan.upper
        else:
            clipped[key] = 0.0
    return clipped


def _shifted(state, net, scale):
    return {key: value + scale * net[key] for key, value in state.items()}


def _advance(model, state, values, time, dt, method, parameters_at):
    """
    One integration step from `state`, whose evaluated `values` at `time` are
    already known.
    """
    k1 = net_flows(model, values)
    if method is Method.euler:
        net = k1
    else:
        half = time + dt / 2
        half_parameters = parameters_at(half)
        k2 = net_flows(
            model, evaluate(model, _shifted(state, k1, dt / 2), half, half_parameters)
        )
        k3 = net_flows(
            model, evaluate(model, _shifted(state, k2, dt / 2), half, half_parameters)
        )
        end = time + dt
        k4 = net_flows(
            model, evaluate(model, _shifted(state, k3, dt), end, parameters_at(end))
        )
        net = {
            key: (k1[key] + 2.0 * k2[key] + 2.0 * k3[key] + k4[key]) / 6.0
            for key in k1
        }
    new_state = _shifted(state, net, dt)
    clipped = _clamp(model, new_state)
    return StepResult(new_state, net, clipped)


def integrate_step(model, state, time, dt, method=Method.euler, overrides=None):
    """
    Advance every stock by one step of `dt` from `time`.

    :returns: a `StepResult` with the new state, the net flow used for each
        stock and the amount each stock was clipped by.
    :raises NonFiniteValue: an evaluated variable is NaN or infinite.
    """
    method = Method(method)

    def parameters_at(t):
        return model.parameter_values(t, overrides)

    values = evaluate(model, state, time, parameters_at(time))
    return _advance(model, dict(state), values, time, dt, method, parameters_at)


def resolve_overrides(model, overrides):
    """
    Expand override targets (instance keys or parameter families) to
    parameter instance keys.
    """
    resolved = {}
    for target, value in sorted(overrides.items()):
        try:
            keys = model.keys_for(target, kinds=(VariableKind.parameter,))
        except KeyError:
            raise RunSpecError(f"Unknown parameter '{target}' in overrides")
        if not keys:
            raise RunSpecError(f"'{target}' is not a parameter")
        for key in keys:
            resolved[key] = float(value)
    return resolved


def simulate(model, spec, scenario="baseline"):
    """
    Run `model` over the horizon of `spec`, saving every variable at each save
    interval.

    The run is a pure function of its inputs: the same model and spec give
    bit-identical results.

    :raises NonFiniteValue: with the variable name and time.
    """
    overrides = resolve_overrides(model, spec.overrides)

    def parameters_at(t):
        return model.parameter_values(t, overrides)

    steps = spec.steps
    every = spec.save_every
    rows = steps // every + 1
    keys = list(model.instances)
    stock_keys = list(model.stocks)

    times = np.empty(rows)
    series = {key: np.empty(rows) for key in keys}
    net_integrals = {key: np.empty(rows) for key in stock_keys}
    clipped = {key: np.empty(rows) for key in stock_keys}
    running_net = dict.fromkeys(stock_keys, 0.0)
    running_clip = dict.fromkeys(stock_keys, 0.0)

    state = initial_state(model, parameters_at(spec.start), spec.start)
    row = 0
    for step in range(steps + 1):
        time = spec.start + step * spec.dt
        values = evaluate(model, state, time, parameters_at(time))
        if step % every == 0:
            times[row] = time
            for key in keys:
                series[key][row] = values[key]
            for key in stock_keys:
                net_integrals[key][row] = running_net[key]
                clipped[key][row] = running_clip[key]
            row += 1
        if step == steps:
            break
        result = _advance(
            model, state, values, time, spec.dt, spec.method, parameters_at
        )
        for key in stock_keys:
            running_net[key] += spec.dt * result.net[key]
            running_clip[key] += result.clipped[key]
        state = result.state

    log.debug(
        "Simulated '%s': %d steps of %g with %s", scenario, steps, spec.dt,
        spec.method.value,
    )
    return RunResult(
        times=times,
        series=series,
        spec=spec,
        scenario=scenario,
        stocks=tuple(stock_keys),
        net_integrals=net_integrals,
        clipped=clipped,
    )


@dataclass
class ConservationReport:
    """
    Per stock: the largest gap between the saved stock and its initial value
    plus integrated net flow plus clipping (`residuals`), the same gap without
    the clipping term (`unclipped`), and the total clipped amount.
    """

    residuals: Dict[str, float]
    unclipped: Dict[str, float]
    clip_totals: Dict[str, float]
    scales: Dict[str, float]

    def failures(self, rtol=1e-9):
        return [
            key
            for key, residual in self.residuals.items()
            if residual > rtol * self.scales[key]
        ]

    def passed(self, rtol=1e-9):
        return not self.failures(rtol)


def check_conservation(result, model=None):
    """
    Check every stock of `result` against the integrator's own sums of net
    flow and clipping.
    """
    stocks = result.stocks or (tuple(model.stocks) if model is not None else ())
    residuals = {}
    unclipped = {}
    clip_totals = {}
    scales = {}
    for key in stocks:
        values = result.series[key]
        change = values - values[0]
        drift = change - result.net_integrals[key]
        residuals[key] = float(np.max(np.abs(drift - result.clipped[key])))
        unclipped[key] = float(np.max(np.abs(drift)))
        clip_totals[key] = float(result.clipped[key][-1])
        scales[key] = max(1.0, float(np.max(np.abs(values))))
    return ConservationReport(residuals, unclipped, clip_totals, scales)
