# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

import dataclasses

import pytest

from sdflow import engine
from sdflow import healthcare
from sdflow import loader
from sdflow import resolver
from sdflow.model import VariableKind

import util


def _values(model, time=0.0):
    parameters = model.parameter_values(time)
    state = engine.initial_state(model, parameters, time)
    return engine.evaluate(model, state, time, parameters)


def test_instances_are_expanded():
    model = util.load(
        """
        dimension g = {a, b}
        parameter p[g] = {a: 1, b: 2}
        parameter k = 3
        aux x[g] = p * k
        """
    )
    assert list(model.instances) == ["p[a]", "p[b]", "k", "x[a]", "x[b]"]
    assert model.parameters == {"p[a]": 1.0, "p[b]": 2.0, "k": 3.0}
    assert model.instances["x[b]"].kind is VariableKind.auxiliary
    assert model.instances["x[b]"].elements == ("b",)
    values = _values(model)
    assert values["x[a]"] == 3.0
    assert values["x[b]"] == 6.0


def test_order_follows_dependencies():
    model = util.load(
        """
        aux c = b + 1
        aux b = a * 2
        aux a = 1
        """
    )
    assert model.order == ("a", "b", "c")
    assert _values(model)["c"] == 3.0


def test_order_ties_follow_declaration_order():
    model = util.load(
        """
        aux z = 1
        aux y = 2
        aux x = y + z
        """
    )
    assert model.order == ("z", "y", "x")


def test_aggregates_and_star():
    model = util.load(
        """
        dimension g = {a, b, c}
        parameter p[g] = {a: 1, b: 2, c: 6}
        aux total = sum(p[g])
        aux average = mean(p[g])
        aux share[g] = p[*] / total
        aux first = p[a]
        """
    )
    values = _values(model)
    assert values["total"] == 9.0
    assert values["average"] == 3.0
    assert values["share[c]"] == pytest.approx(6.0 / 9.0)
    assert values["first"] == 1.0


def test_builtin_functions():
    model = util.load(
        """
        lookup effect = [(0, 0), (1, 10)]
        aux a = safe_divide(1, 0, 7)
        aux b = safe_divide(6, 3, 7)
        aux c = min(3, 1, 2) + max(3, 1, 2)
        aux d = abs(-2) + exp(0)
        aux e = effect(0.25) + effect(5)
        aux f = if time >= 0 then 1 else 2
        aux g = (2 < 3) + (2 == 3) + 2 ^ 3
        """
    )
    values = _values(model)
    assert values["a"] == 7.0
    assert values["b"] == 2.0
    assert values["c"] == 4.0
    assert values["d"] == 3.0
    assert values["e"] == pytest.approx(12.5)
    assert values["f"] == 1.0
    assert values["g"] == 9.0


def test_algebraic_cycle():
    diagnostics = util.diagnostics(
        """
        aux b = a + 1
        aux a = b * 2
        """
    )
    assert [(d.code, d.line, d.column) for d in diagnostics] == [
        ("CycleError", 3, 1)
    ]
    assert "algebraic cycle between a, b" in diagnostics[0].message


def test_dimension_mismatch_points_at_variable():
    source, diagnostics = util.parse(
        """
        dimension g = {a}
        dimension h = {b}
        parameter p[h] = 1
        aux y[g] = 1
        aux z[h] = p
        """
    )
    assert diagnostics == []
    result = resolver.resolve(source)
    assert list(result) == []
    definition = result.value
    definition.variables["y"] = dataclasses.replace(
        definition.variables["y"], equation=definition.variables["z"].equation
    )

    model, diagnostic = loader.compile_definition(definition, "<string>")
    assert model is None
    assert (diagnostic.code, diagnostic.line, diagnostic.column) == (
        "DimensionMismatch",
        5,
        1,
    )
    assert diagnostic.message.startswith("in 'y': ")


def test_stock_breaks_cycle():
    model = util.load(
        """
        flow f = s * 0.1
        stock s {
            initial = 10
            inflows = [f]
        }
        """
    )
    assert model.order == ("f",)
    assert model.stock_keys == ("s",)


def test_initialization_cycle():
    diagnostics = util.diagnostics(
        """
        aux a = s
        stock s {
            initial = a
        }
        """
    )
    assert [d.code for d in diagnostics] == ["CycleError"]
    assert "initialization cycle" in diagnostics[0].message


def test_initials_may_read_auxiliaries():
    model = util.load(
        """
        parameter k = 4
        aux start = k * 2
        stock s {
            initial = start
        }
        """
    )
    assert engine.initial_state(model, model.parameter_values(0.0)) == {"s": 8.0}


def test_with_parameters_and_initials_copy():
    model = util.load(
        """
        parameter k = 1
        stock s {
            initial = 5
        }
        """
    )
    changed = model.with_parameters({"k": 2.0}).with_initials({"s": 9.0})
    assert model.parameters["k"] == 1.0
    assert model.initials == {}
    assert changed.parameters["k"] == 2.0
    assert engine.initial_state(changed, changed.parameter_values(0.0)) == {
        "s": 9.0
    }


def test_keys_for():
    model = util.load(
        """
        dimension g = {a, b}
        parameter p[g] = 1
        aux x[g] = p
        """
    )
    assert model.keys_for("p") == ["p[a]", "p[b]"]
    assert model.keys_for("p[b]") == ["p[b]"]
    assert model.keys_for("x", kinds=(VariableKind.parameter,)) == []
    with pytest.raises(KeyError):
        model.keys_for("missing")


def test_bundled_model_compiles():
    result = loader.load_model(healthcare.bundled_files())
    assert [d for d in result if d.is_error] == []
    model = result.value
    assert len(model.stocks) == 19 * len(healthcare.GROUPS)
    for name in healthcare.METRICS:
        assert model.keys_for(name) == [
            f"{name}[{group}]" for group in healthcare.GROUPS
        ]


def test_bundled_order_reads_multipliers_before_screening():
    model = loader.require_model(healthcare.bundled_files())
    for group in healthcare.GROUPS:
        assert model.order.index(f"trustScreenMult[{group}]") < model.order.index(
            f"screenStartRate[{group}]"
        )
    assert len(model.order) == len(set(model.order))
    assert set(model.order) == set(model.equations)
