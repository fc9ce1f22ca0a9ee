# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

import math

from hypothesis import given, settings
from hypothesis import strategies as st
import numpy as np
import pytest

from sdflow import engine
from sdflow.engine import Method, RunSpec, RunSpecError
from sdflow.model import LookupTable

import util


DECAY = """
    parameter tau = 5
    flow out = S / tau
    stock S {
        initial = 1
        outflows = [out]
        nonneg
    }
    """


def test_eval_lookup():
    line = LookupTable("line", ((0.0, 0.0), (1.0, 1.0)))
    assert engine.eval_lookup(line, 0.5) == 0.5
    assert engine.eval_lookup(line, 2.0) == 1.0
    assert engine.eval_lookup(line, -1.0) == 0.0
    bent = LookupTable("bent", ((0.0, 0.5), (0.5, 0.9), (1.0, 1.0)))
    assert engine.eval_lookup(bent, 0.75) == pytest.approx(0.95)


def test_lookup_needs_increasing_points():
    with pytest.raises(ValueError):
        LookupTable("flat", ((0.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ValueError):
        LookupTable("single", ((0.0, 0.0),))


def test_safe_divide():
    assert engine.safe_divide(4, 2, 0) == 2
    assert engine.safe_divide(4, 0, 7) == 7
    assert engine.safe_divide(0, 0, 0.5) == 0.5
    assert engine.safe_divide(1, 1e-13, 3) == 3


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-100, max_value=100), min_size=2, max_size=8, unique=True
    ),
    st.lists(st.floats(min_value=0, max_value=10), min_size=8, max_size=8),
    st.floats(min_value=-200, max_value=200),
    st.floats(min_value=-200, max_value=200),
)
def test_lookup_preserves_monotonicity(xs, steps, a, b):
    xs = sorted(xs)
    ys = np.cumsum(steps[: len(xs)])
    table = LookupTable("rising", tuple(zip(xs, ys)))
    low, high = sorted((a, b))
    assert engine.eval_lookup(table, low) <= engine.eval_lookup(table, high)


@given(
    st.floats(allow_nan=False, allow_infinity=False),
    st.floats(min_value=-1e-12, max_value=1e-12),
    st.floats(allow_nan=False, allow_infinity=False),
)
def test_safe_divide_falls_back_near_zero(num, den, fallback):
    assert engine.safe_divide(num, den, fallback) == fallback


def test_run_spec_validation():
    spec = RunSpec()
    assert (spec.start, spec.stop, spec.dt, spec.save_interval) == (
        0.0,
        20.0,
        0.0625,
        0.25,
    )
    assert spec.method is Method.euler
    assert spec.steps == 320
    assert spec.save_every == 4
    assert RunSpec(method="rk4").method is Method.rk4

    with pytest.raises(RunSpecError, match="not an integer multiple"):
        RunSpec(dt=0.3)
    with pytest.raises(RunSpecError, match="must be positive"):
        RunSpec(dt=0)
    with pytest.raises(RunSpecError, match="must be after"):
        RunSpec(start=5, stop=5)
    with pytest.raises(RunSpecError, match="Unknown integration method"):
        RunSpec(method="midpoint")


def test_integrate_step_euler():
    model = util.load(
        """
        flow drain = 10
        stock S {
            initial = 100
            outflows = [drain]
        }
        """
    )
    step = engine.integrate_step(model, {"S": 100.0}, 0.0, 0.25)
    assert step.state == {"S": 97.5}
    assert step.net == {"S": -10.0}
    assert step.clipped == {"S": 0.0}


def test_integrate_step_clips_nonneg_stock():
    model = util.load(
        """
        flow drain = 4
        stock S {
            outflows = [drain]
            nonneg
        }
        """
    )
    step = engine.integrate_step(model, {"S": 0.0}, 0.0, 0.25)
    assert step.state == {"S": 0.0}
    assert step.clipped == {"S": 1.0}


def test_integrate_step_upper_bound():
    model = util.load(
        """
        flow fill = 8
        stock S {
            initial = 0.5
            inflows = [fill]
            upper = 1
        }
        """
    )
    step = engine.integrate_step(model, {"S": 0.5}, 0.0, 0.25)
    assert step.state == {"S": 1.0}
    assert step.clipped == {"S": -1.5}


def test_integrate_step_rk4():
    model = util.load(
        """
        flow out = S
        stock S {
            initial = 1
            outflows = [out]
        }
        """
    )
    step = engine.integrate_step(model, {"S": 1.0}, 0.0, 0.1, Method.rk4)
    assert step.state["S"] == pytest.approx(math.exp(-0.1), abs=1e-6)


def test_constant_stock():
    model = util.load(
        """
        flow none = 0
        stock S {
            initial = 5
            inflows = [none]
        }
        """
    )
    run = engine.simulate(model, RunSpec())
    assert len(run.times) == 81
    assert run.times[0] == 0.0
    assert run.times[-1] == 20.0
    assert np.all(run.series["S"] == 5.0)


def test_exponential_decay():
    model = util.load(DECAY)
    run = engine.simulate(model, RunSpec())
    assert run.at("S", 5.0) == pytest.approx(math.exp(-1.0), abs=0.003)
    rk4 = engine.simulate(model, RunSpec(method="rk4"))
    assert rk4.at("S", 5.0) == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert run.index_of(5.0) == 20
    with pytest.raises(KeyError):
        run.index_of(5.1)


def test_simulate_is_deterministic():
    model = util.load(DECAY)
    first = engine.simulate(model, RunSpec(method="rk4"))
    second = engine.simulate(model, RunSpec(method="rk4"))
    assert np.array_equal(first.times, second.times)
    for key, values in first.series.items():
        assert np.array_equal(values, second.series[key])


def test_series_cover_every_instance():
    model = util.load(DECAY)
    run = engine.simulate(model, RunSpec(stop=1.0))
    assert set(run.series) == set(model.instances)
    assert all(len(values) == len(run.times) for values in run.series.values())
    assert run.stocks == ("S",)
    assert run.spec.stop == 1.0


def test_overrides():
    model = util.load(DECAY)
    run = engine.simulate(model, RunSpec(stop=1.0, overrides={"tau": 1e9}))
    assert run.series["tau"][0] == 1e9
    assert run.series["S"][-1] == pytest.approx(1.0)
    with pytest.raises(RunSpecError, match="Unknown parameter 'missing'"):
        engine.simulate(model, RunSpec(overrides={"missing": 1}))
    with pytest.raises(RunSpecError, match="is not a parameter"):
        engine.simulate(model, RunSpec(overrides={"out": 1}))


def test_non_finite_value():
    model = util.load(
        """
        aux broken = 1 / (time - 1)
        """
    )
    with pytest.raises(engine.NonFiniteValue) as excinfo:
        engine.simulate(model, RunSpec(stop=2.0))
    assert excinfo.value.variable == "broken"
    assert excinfo.value.time == 1.0
    assert "'broken' is not finite at t=1" in str(excinfo.value)


def test_conservation_without_clipping():
    for method in Method:
        run = engine.simulate(util.load(DECAY), RunSpec(method=method))
        report = engine.check_conservation(run)
        assert report.passed(1e-9)
        assert report.clip_totals == {"S": 0.0}


def test_conservation_with_clipping():
    model = util.load(
        """
        flow drain = 1
        stock S {
            initial = 2
            outflows = [drain]
            nonneg
        }
        """
    )
    run = engine.simulate(model, RunSpec(stop=5.0))
    report = engine.check_conservation(run)
    assert report.passed()
    assert report.clip_totals["S"] == pytest.approx(3.0)
    assert report.unclipped["S"] == pytest.approx(3.0)
    assert run.series["S"][-1] == 0.0


@settings(max_examples=30, deadline=None)
@given(
    st.floats(min_value=0, max_value=1000),
    st.floats(min_value=0, max_value=50),
    st.floats(min_value=0.01, max_value=2),
    st.sampled_from(["euler", "rk4"]),
)
def test_conservation_holds_for_any_rates(initial, inflow, rate, method):
    model = util.load(
        f"""
        parameter inflowRate = {inflow!r}
        parameter rate = {rate!r}
        flow arrive = inflowRate
        flow leave = S * rate + 5
        stock S {{
            initial = {initial!r}
            inflows = [arrive]
            outflows = [leave]
            nonneg
        }}
        """
    )
    run = engine.simulate(model, RunSpec(stop=5.0, method=method))
    assert engine.check_conservation(run).passed(1e-9)
    assert np.all(run.series["S"] >= 0.0)
