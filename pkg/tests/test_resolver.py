# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

import pytest

from sdflow import resolver
from sdflow.model import VariableKind

import util


def _codes(text):
    return [(d.code, d.line, d.column) for d in util.diagnostics(text)]


def _resolve(text):
    model, diagnostics = util.parse(text)
    assert diagnostics == []
    result = resolver.resolve(model)
    return list(result), result.value


def test_resolve_definition():
    diagnostics, definition = _resolve(
        """
        dimension g = {a, b}
        parameter p[g] = {a: 1, b: 2}
        parameter k = 0.5
        lookup effect = [(0, 0), (1, 2)]
        flow f[g] = p * k * effect(s)
        stock s[g] {
            inflows = [f]
        }
        scenario policy {
            addStep(k, 5, 1)
        }
        equilibrium {
            targets = [s]
            damping = 0.25
        }
        """
    )
    assert diagnostics == []
    assert definition.dimensions["g"].elements == ("a", "b")
    assert definition.variables["p"].values == {("a",): 1.0, ("b",): 2.0}
    assert definition.variables["k"].values == {(): 0.5}
    assert definition.variables["f"].kind is VariableKind.flow
    assert definition.variables["s"].inflows == ("f",)
    assert definition.lookups["effect"](0.5) == pytest.approx(1.0)
    assert definition.scenarios["policy"].overlays[0].target == "k"
    assert definition.equilibrium.targets == ("s",)
    assert definition.equilibrium.damping == 0.25


def test_undefined_reference():
    assert _codes("aux x = y + 1") == [("UndefinedReference", 1, 9)]


def test_undefined_reference_reported_once_per_use():
    codes = _codes(
        """
        aux x = y + 1
        aux z = y * 2
        """
    )
    assert codes == [("UndefinedReference", 2, 9), ("UndefinedReference", 3, 9)]


def test_duplicate_definition():
    codes = _codes(
        """
        parameter k = 1
        aux k = 2
        """
    )
    assert codes == [("DuplicateDefinition", 3, 1)]


def test_time_is_reserved():
    assert _codes("aux time = 1") == [("DuplicateDefinition", 1, 1)]


def test_time_is_readable():
    assert _codes("aux x = time * 2") == []


def test_flow_lists_must_name_flows():
    codes = _codes(
        """
        aux a = 1
        stock s {
            inflows = [a]
        }
        """
    )
    assert codes == [("KindMismatch", 3, 1)]


def test_stock_lists_undefined_flow():
    codes = _codes(
        """
        stock s {
            outflows = [drain]
        }
        """
    )
    assert codes == [("UndefinedReference", 2, 1)]


def test_lookup_used_as_value():
    codes = _codes(
        """
        lookup effect = [(0, 0), (1, 1)]
        aux x = effect + 1
        """
    )
    assert codes == [("KindMismatch", 3, 9)]


def test_unknown_function_and_arity():
    assert _codes("aux x = wobble(1)") == [("UndefinedReference", 1, 9)]
    assert _codes("aux x = safe_divide(1, 2)") == [("InvalidCall", 1, 9)]
    assert _codes("aux x = exp(1, 2)") == [("InvalidCall", 1, 9)]
    assert _codes("aux x = max()") == [("InvalidCall", 1, 9)]


def test_aggregates_need_a_reference():
    codes = _codes(
        """
        dimension g = {a, b}
        parameter p[g] = 1
        aux x = sum(p[g] * 2)
        """
    )
    assert codes == [("InvalidCall", 4, 9)]


def test_unknown_element():
    codes = _codes(
        """
        dimension g = {a, b}
        parameter p[g] = {a: 1, c: 2}
        """
    )
    assert codes == [("DimensionMismatch", 3, 28)]


def test_missing_element_value():
    codes = _codes(
        """
        dimension g = {a, b}
        parameter p[g] = {a: 1}
        """
    )
    assert codes == [("InvalidValue", 3, 1)]


def test_undefined_dimension():
    assert _codes("aux x[h] = 1") == [("UndefinedReference", 1, 1)]


def test_subscript_outside_dimension():
    codes = _codes(
        """
        dimension g = {a, b}
        parameter p[g] = 1
        aux x = p
        """
    )
    assert [code for code, _, _ in codes] == ["DimensionMismatch"]


def test_flow_with_extra_dimension():
    codes = _codes(
        """
        dimension g = {a, b}
        flow f[g] = 1
        stock s {
            inflows = [f]
        }
        """
    )
    assert codes == [("DimensionMismatch", 4, 1)]


def test_unsorted_lookup():
    assert _codes("lookup l = [(1, 0), (0, 1)]") == [("InvalidLookup", 1, 1)]


def test_invalid_lookup_is_reported_once():
    codes = _codes(
        """
        lookup l = [(0, 1)]
        aux x = l(0.5) + 1
        """
    )
    assert codes == [("InvalidLookup", 2, 1)]


def test_invalid_dimension_is_reported_once():
    codes = _codes(
        """
        dimension g = {a, a}
        parameter p[g] = 1
        aux x[g] = p * 2
        aux y = sum(p[g])
        """
    )
    assert codes == [("InvalidValue", 2, 1)]


def test_scenario_targets_must_be_parameters():
    codes = _codes(
        """
        aux x = 1
        scenario s {
            step(x, 1, 2)
            missing = 1
        }
        """
    )
    assert codes == [("KindMismatch", 4, 5), ("UndefinedReference", 5, 5)]


def test_overlay_arity():
    codes = _codes(
        """
        parameter k = 1
        scenario s {
            pulse(k, 1, 2)
        }
        """
    )
    assert codes == [("InvalidCall", 4, 5)]


def test_equilibrium_targets_must_be_stocks():
    codes = _codes(
        """
        aux x = 1
        equilibrium {
            targets = [x]
        }
        """
    )
    assert codes == [("KindMismatch", 3, 1)]


def test_all_errors_in_one_pass():
    codes = _codes(
        """
        aux x = y
        aux x = 2
        aux z = exp()
        """
    )
    assert sorted(code for code, _, _ in codes) == [
        "DuplicateDefinition",
        "InvalidCall",
        "UndefinedReference",
    ]
