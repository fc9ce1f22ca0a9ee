# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Behavior patterns: declarative, machine-checkable claims about the shape of
simulation runs, loaded from YAML.
"""

from dataclasses import dataclass, field
import functools
import logging
import math
from pathlib import Path
import textwrap
from typing import ClassVar, Dict, List, Tuple

import jsonschema
from jsonschema.exceptions import ValidationError
import numpy as np

from .model import instance_key
from .scenarios import UnknownTarget
from . import util


log = logging.getLogger(__name__)


ROOT_DIR = Path(__file__).parent
SCHEMAS_DIR = ROOT_DIR / "schemas"

PATTERNS_ID = "sdflow://schemas/patterns/1-0-0"


class MissingRun(ValueError):
    """
    The runs handed to the suite lack some run a pattern needs.
    """

    def __init__(self, runs):
        self.runs = sorted(runs)
        super().__init__(
            f"Missing run(s) for behavior patterns: {', '.join(self.runs)}"
        )


class PatternFileError(ValueError):
    pass


def _series(runs, run, metric, group):
    result = runs[run]
    key = instance_key(metric, (group,) if group else ())
    if key not in result.series:
        raise UnknownTarget(
            f"Run '{run}' has no series '{key}'. Available metrics: "
            f"{', '.join(result.families())}"
        )
    return result.times, result.series[key]


def _value(runs, run, metric, group, time):
    times, values = _series(runs, run, metric, group)
    return float(values[runs[run].index_of(time)])


def _window(times, values, start, end):
    mask = (times >= start - 1e-9) & (times <= end + 1e-9)
    return times[mask], values[mask]


def _in_band(value, band):
    low, high = band
    return low <= value <= high


def _band_text(band):
    low, high = band
    return f"[{util.format_float(low)}, {util.format_float(high)}]"


@dataclass
class PatternResult:
    name: str
    description: str
    kind: str
    measured: float
    band: str
    passed: bool

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


@dataclass
class Pattern:
    """
    Base class of every pattern kind.  Subclasses register themselves by
    `kind` and implement `measure`.
    """

    kinds: ClassVar[Dict[str, type]] = {}

    name: str
    description: str
    run: str

    def __init_subclass__(cls, kind, **kwargs):
        super().__init_subclass__(**kwargs)
        cls.kind = kind
        Pattern.kinds[kind] = cls

    @classmethod
    def make(cls, name, data):
        """
        Build a pattern of the kind named in `data`, which has already been
        validated against the patterns schema.
        """
        data = dict(data)
        kind = data.pop("kind")
        if kind not in cls.kinds:
            raise ValueError(f"Unknown pattern kind '{kind}'")
        return cls.kinds[kind](name=name, **data)

    @property
    def runs(self):
        return {self.run}

    def measure(self, runs) -> Tuple[float, str, bool]:
        raise NotImplementedError

    def evaluate(self, runs):
        measured, band, passed = self.measure(runs)
        return PatternResult(
            name=self.name,
            description=self.description,
            kind=self.kind,
            measured=measured,
            band=band,
            passed=bool(passed),
        )


@dataclass
class Drift(Pattern, kind="drift"):
    metrics: List[str] = field(default_factory=list)
    tolerance: float = 1e-3

    def measure(self, runs):
        result = runs[self.run]
        worst = 0.0
        for metric in self.metrics:
            members = result.family(metric)
            if not members:
                raise UnknownTarget(
                    f"Run '{self.run}' has no metric '{metric}'. Available "
                    f"metrics: {', '.join(result.families())}"
                )
            for values in members.values():
                worst = max(worst, float(np.max(np.abs(values - values[0]))))
        return worst, f"< {util.format_float(self.tolerance)}", worst < self.tolerance


@dataclass
class Delta(Pattern, kind="delta"):
    baseline: str = "baseline"
    metric: str = ""
    group: str = ""
    at: float = 0.0
    band: Tuple[float, float] = (0.0, 0.0)

    @property
    def runs(self):
        return {self.run, self.baseline}

    def measure(self, runs):
        delta = _value(runs, self.run, self.metric, self.group, self.at) - _value(
            runs, self.baseline, self.metric, self.group, self.at
        )
        return delta, _band_text(self.band), _in_band(delta, self.band)


@dataclass
class DeltaExceeds(Pattern, kind="delta_exceeds"):
    other: str = ""
    baseline: str = "baseline"
    metric: str = ""
    group: str = ""
    at: float = 0.0
    strict: bool = False

    @property
    def runs(self):
        return {self.run, self.other, self.baseline}

    def _delta(self, runs, run):
        return _value(runs, run, self.metric, self.group, self.at) - _value(
            runs, self.baseline, self.metric, self.group, self.at
        )

    def measure(self, runs):
        margin = self._delta(runs, self.run) - self._delta(runs, self.other)
        if self.strict:
            return margin, "> 0", margin > 0
        return margin, ">= 0", margin >= 0


@dataclass
class Slope(Pattern, kind="slope"):
    metric: str = ""
    group: str = ""
    at: float = 0.0
    band: Tuple[float, float] = (0.0, 0.0)
    window: float = 1.0

    def measure(self, runs):
        end = _value(runs, self.run, self.metric, self.group, self.at)
        start = _value(runs, self.run, self.metric, self.group, self.at - self.window)
        slope = (end - start) / self.window
        return slope, _band_text(self.band), _in_band(slope, self.band)


@dataclass
class RiseThenBelow(Pattern, kind="rise_then_below"):
    """
    The series climbs above its value at `start` at some point, and is below
    that value at `end`.  The measured value is the final shortfall.
    """

    metric: str = ""
    group: str = ""
    start: float = 0.0
    end: float = 0.0

    def measure(self, runs):
        times, values = _series(runs, self.run, self.metric, self.group)
        times, values = _window(times, values, self.start, self.end)
        reference = float(values[0])
        peak = float(np.max(values[1:])) if len(values) > 1 else reference
        final = float(values[-1])
        passed = peak > reference and final < reference
        return final - reference, "< 0 after a rise", passed


@dataclass
class Ordering(Pattern, kind="ordering"):
    metric: str = ""
    higher: str = ""
    lower: str = ""
    start: float = 0.0
    end: float = 0.0

    def measure(self, runs):
        times, high = _series(runs, self.run, self.metric, self.higher)
        _, low = _series(runs, self.run, self.metric, self.lower)
        _, gap = _window(times, high - low, self.start, self.end)
        if not len(gap):
            raise UnknownTarget(
                f"Pattern '{self.name}': no saved times in "
                f"{self.start:g}..{self.end:g}"
            )
        smallest = float(np.min(gap))
        return smallest, "> 0", smallest > 0


def halt_time(times, values):
    """
    Last saved time at which `values` is positive: ``inf`` if it still is at
    the end, the first saved time if it never was.
    """
    positive = np.nonzero(values > 0)[0]
    if not len(positive):
        return float(times[0])
    if positive[-1] == len(values) - 1:
        return math.inf
    return float(times[positive[-1]])


@dataclass
class HaltOrder(Pattern, kind="halt_order"):
    metric: str = ""
    first: str = ""
    second: str = ""

    def measure(self, runs):
        first = halt_time(*_series(runs, self.run, self.metric, self.first))
        second = halt_time(*_series(runs, self.run, self.metric, self.second))
        band = f"<= {util.format_float(second)}"
        if math.isinf(first) and math.isinf(second):
            # Holds without either series ever halting.
            band += f" (neither {self.first} nor {self.second} halts)"
        return first, band, first <= second


@dataclass
class ValueOrder(Pattern, kind="value_order"):
    other: str = ""
    metric: str = ""
    group: str = ""
    at: float = 0.0
    strict: bool = False

    @property
    def runs(self):
        return {self.run, self.other}

    def measure(self, runs):
        margin = _value(runs, self.run, self.metric, self.group, self.at) - _value(
            runs, self.other, self.metric, self.group, self.at
        )
        if self.strict:
            return margin, "> 0", margin > 0
        return margin, ">= 0", margin >= 0


@dataclass
class PatternReport:
    results: List[PatternResult]

    @property
    def passed(self):
        return all(result.passed for result in self.results)

    @property
    def failures(self):
        return [result.name for result in self.results if not result.passed]

    def table(self):
        template = util.get_jinja2_template("patterns.txt.jinja2")
        return template.render(results=self.results, failures=self.failures)


def _update_validator(validator):
    def required(validator, required, instance, schema):
        if not validator.is_type(instance, "object"):
            return
        missing_properties = sorted(
            set(property for property in required if property not in instance)
        )
        if missing_properties:
            yield ValidationError(
                f"Missing required properties: {', '.join(missing_properties)}"
            )

    validator.VALIDATORS["required"] = required


@functools.lru_cache(maxsize=1)
def _load_schemas():
    """
    Load all of the known schemas from disk, keyed by the schema's $id.
    """
    schemas = {}
    for schema_path in SCHEMAS_DIR.glob("*.yaml"):
        schema = util.load_yaml_or_json(schema_path)
        resolver = util.get_null_resolver(schema)
        validator_class = jsonschema.validators.validator_for(schema)
        _update_validator(validator_class)
        validator_class.check_schema(schema)
        validator = validator_class(schema, resolver=resolver)
        schemas[schema["$id"]] = (schema, validator)
    return schemas


def get_parameter_doc(key):
    """
    Returns documentation about a specific pattern parameter.
    """
    schema, _ = _load_schemas()[PATTERNS_ID]
    parameter = schema["additionalProperties"]["properties"][key]
    if "$ref" in parameter:
        parameter = schema["definitions"][parameter["$ref"].rsplit("/", 1)[-1]]
    return parameter.get("description", "")


def validate(content, filepath="<input>"):
    """
    Validate the given content against the patterns schema.
    """
    schemas = _load_schemas()
    schema_id = content.get("$schema")
    if schema_id not in schemas:
        yield util.format_error(
            filepath, "", f"$schema key must be one of {', '.join(schemas.keys())}"
        )
        return
    _, validator = schemas[schema_id]
    yield from (
        util.format_error(filepath, "", util.pprint_validation_error(e))
        for e in validator.iter_errors(content)
    )


@util.keep_value
def load_patterns(filepath):
    """
    Load a patterns file.

    The result is a generator over error messages; the list of `Pattern`
    objects, in file order, is on `.value`.
    """
    try:
        content = util.load_yaml_or_json(filepath)
    except Exception as e:
        yield util.format_error(filepath, "", textwrap.fill(str(e)))
        return []

    if not content:
        yield util.format_error(filepath, "", f"'{filepath}' has no patterns.")
        return []

    failed = False
    for error in validate(content, filepath):
        failed = True
        yield error
    if failed:
        return []

    patterns = []
    for name, data in content.items():
        if name.startswith("$"):
            continue
        try:
            patterns.append(Pattern.make(name, data))
        except Exception as e:
            yield util.format_error(filepath, f"For pattern '{name}'", str(e))
    return patterns


def read_patterns(filepath):
    """
    Like `load_patterns`, raising `PatternFileError` with every message if
    the file is not valid.
    """
    result = load_patterns(filepath)
    errors = list(result)
    if errors:
        raise PatternFileError("\n".join(errors))
    return result.value


def required_runs(patterns):
    runs = set()
    for pattern in patterns:
        runs |= pattern.runs
    return runs


def behavior_pattern_suite(runs, patterns):
    """
    Evaluate every pattern against `runs`, a mapping of run names to
    `engine.RunResult`.

    :raises MissingRun: naming every run that is needed but absent.
    """
    missing = required_runs(patterns) - set(runs)
    if missing:
        raise MissingRun(missing)
    results = []
    for pattern in patterns:
        result = pattern.evaluate(runs)
        log.debug("%s: %s (%r)", pattern.name, result.verdict, result.measured)
        results.append(result)
    return PatternReport(results)
