# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Timed parameter overlays, scenarios, and scenario-versus-baseline comparison.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
from typing import ClassVar, Dict, Tuple

import numpy as np

from .model import VariableKind, split_key
from . import engine


log = logging.getLogger(__name__)


BASELINE = "baseline"


class UnknownTarget(ValueError):
    pass


class KindMismatch(ValueError):
    pass


class MisalignedGrids(ValueError):
    pass


class ScenarioRunError(ValueError):
    """
    A simulation error raised while running the named scenario.
    """

    def __init__(self, scenario, error):
        self.scenario = scenario
        self.error = error
        super().__init__(f"scenario '{scenario}': {error}")


@dataclass(frozen=True)
class Overlay:
    """
    Base class of the overlay shapes.  Each shape registers itself under the
    name used in `scenario` blocks.
    """

    shapes: ClassVar[Dict[str, type]] = {}
    arity: ClassVar[int] = 2

    target: str
    t0: float

    def __init_subclass__(cls, shape, **kwargs):
        super().__init_subclass__(**kwargs)
        cls.shape = shape
        Overlay.shapes[shape] = cls

    @classmethod
    def make(cls, shape, target, args):
        """
        Build the overlay `shape` from positional arguments as written in a
        `scenario` block.
        """
        overlay_class = cls.shapes[shape]
        if len(args) != overlay_class.arity:
            raise ValueError(
                f"{shape}() takes a target and {overlay_class.arity} numbers, "
                f"got {len(args)}"
            )
        return overlay_class(target, *(float(arg) for arg in args))

    def apply(self, base, time):
        raise NotImplementedError()

    @property
    def start(self):
        return self.t0


@dataclass(frozen=True)
class Step(Overlay, shape="step"):
    value: float = 0.0

    def apply(self, base, time):
        return self.value if time >= self.t0 else base


@dataclass(frozen=True)
class AddStep(Overlay, shape="addStep"):
    delta: float = 0.0

    def apply(self, base, time):
        return base + self.delta if time >= self.t0 else base


@dataclass(frozen=True)
class ScaleStep(Overlay, shape="scaleStep"):
    factor: float = 1.0

    def apply(self, base, time):
        return base * self.factor if time >= self.t0 else base


@dataclass(frozen=True)
class Pulse(Overlay, shape="pulse"):
    arity: ClassVar[int] = 3

    width: float = 0.0
    height: float = 0.0

    def apply(self, base, time):
        if self.t0 <= time < self.t0 + self.width:
            return base + self.height
        return base


@dataclass(frozen=True)
class Ramp(Overlay, shape="ramp"):
    arity: ClassVar[int] = 3

    t1: float = 0.0
    slope: float = 0.0

    def apply(self, base, time):
        if time <= self.t0:
            return base
        return base + self.slope * (min(time, self.t1) - self.t0)


@dataclass(frozen=True)
class Scenario:
    name: str
    overlays: Tuple[Overlay, ...] = ()
    switches: Dict[str, float] = field(default_factory=dict)

    @property
    def start(self):
        """
        Time of the earliest overlay; switches act from the start of a run.
        """
        if self.switches or not self.overlays:
            return None
        return min(overlay.start for overlay in self.overlays)


@dataclass
class DeltaReport:
    metric: str
    group: str
    time: float
    baseline: float
    scenario: float
    absolute: float
    relative: float

    @property
    def key(self):
        if self.group:
            return f"{self.metric}[{self.group}]"
        return self.metric


def _parameter_keys(model, target):
    try:
        keys = model.keys_for(target)
    except KeyError:
        raise UnknownTarget(f"Unknown overlay target '{target}'")
    wrong = [
        key for key in keys if model.instances[key].kind is not VariableKind.parameter
    ]
    if wrong:
        kind = model.instances[wrong[0]].kind.value
        raise KindMismatch(
            f"Overlay target '{target}' is a {kind}; only parameters can be "
            f"overlaid"
        )
    return keys


def apply_scenario(model, scenario):
    """
    A copy of `model` whose parameters follow the scenario's overlays and
    switch settings.  `model` itself is left unchanged.

    :raises UnknownTarget: an overlay or switch names nothing in the model.
    :raises KindMismatch: an overlay or switch names a non-parameter.
    """
    switched = {}
    for name, value in scenario.switches.items():
        for key in _parameter_keys(model, name):
            switched[key] = float(value)

    overlays = []
    for overlay in scenario.overlays:
        for key in _parameter_keys(model, overlay.target):
            overlays.append((key, overlay))

    return model.with_parameters(switched).with_overlays(overlays)


def _run_one(model, spec, scenario):
    name = BASELINE if scenario is None else scenario.name
    try:
        if scenario is not None:
            model = apply_scenario(model, scenario)
        return engine.simulate(model, spec, scenario=name)
    except engine.NonFiniteValue as e:
        raise ScenarioRunError(name, e) from e


def run_scenarios(model, spec, scenarios=(), threads=None):
    """
    Run the baseline and every scenario under the same `spec`.

    Runs are independent and may execute on up to `threads` worker threads;
    the returned dict always lists the baseline first, then the scenarios in
    the order given.

    :raises ScenarioRunError: a run failed; names the scenario.
    """
    jobs = [None] + list(scenarios)
    names = [BASELINE] + [scenario.name for scenario in scenarios]
    if len(set(names)) != len(names):
        raise ValueError(f"Scenario names must be unique, got {', '.join(names)}")

    if threads is not None and threads <= 1:
        results = [_run_one(model, spec, job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(_run_one, model, spec, job) for job in jobs]
            results = [future.result() for future in futures]

    log.info("Ran %d scenario(s) over %g..%g", len(jobs), spec.start, spec.stop)
    return dict(zip(names, results))


def _check_grids(baseline, scenario):
    if baseline.times.shape != scenario.times.shape or not np.allclose(
        baseline.times, scenario.times, rtol=0, atol=1e-9
    ):
        raise MisalignedGrids(
            f"Runs '{baseline.scenario}' and '{scenario.scenario}' were saved "
            f"on different time grids"
        )


def compare(baseline, scenario, metrics, at_times):
    """
    One `DeltaReport` per metric, group and time, in that nesting order.

    :param metrics: variable family names (``fractionTreated``) or instance
        keys (``trust[whiteAmericans]``).
    :raises MisalignedGrids: the runs do not share saved times, or a
        requested time is not one of them.
    :raises UnknownTarget: a metric is not in both runs.
    """
    _check_grids(baseline, scenario)
    indices = []
    for time in at_times:
        try:
            indices.append((float(time), baseline.index_of(time)))
        except KeyError:
            raise MisalignedGrids(f"t={time:g} is not a saved time of the runs")

    reports = []
    for metric in metrics:
        if metric in baseline.series:
            name, elements = split_key(metric)
            members = {",".join(elements): metric}
        else:
            name = metric
            members = {
                group: (f"{metric}[{group}]" if group else metric)
                for group in baseline.family(metric)
            }
        missing = any(key not in scenario.series for key in members.values())
        if not members or missing:
            raise UnknownTarget(
                f"Unknown metric '{metric}'. Available metrics: "
                f"{', '.join(baseline.families())}"
            )
        for group, key in members.items():
            for time, index in indices:
                base = float(baseline.series[key][index])
                other = float(scenario.series[key][index])
                absolute = other - base
                reports.append(
                    DeltaReport(
                        metric=name,
                        group=group,
                        time=time,
                        baseline=base,
                        scenario=other,
                        absolute=absolute,
                        relative=engine.safe_divide(absolute, abs(base), 0.0),
                    )
                )
    return reports
