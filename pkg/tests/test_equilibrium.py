# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

import pytest

from sdflow import acceptance
from sdflow import equilibrium
from sdflow import loader
from sdflow.equilibrium import EquilibriumSpec, NoConvergence

import util


def _balance():
    return loader.require_model([acceptance.FIXTURES_DIR / "balance.sdm"])


def test_solve_balance():
    model = _balance()
    solution = equilibrium.solve_equilibrium(model, model.definition.equilibrium)
    assert solution.values["upstream"] == pytest.approx(40.0, abs=1e-9)
    assert solution.values["downstream"] == pytest.approx(20.0, abs=1e-9)
    assert solution.residual <= 1e-13
    assert solution.iterations > 1


def test_declared_block_settings():
    spec = _balance().definition.equilibrium
    assert spec.targets == ("upstream", "downstream")
    assert spec.tolerance == 1e-13
    assert spec.max_iterations == 100000
    assert spec.damping == 0.5


def test_frozen_stocks_are_held():
    model = _balance()
    spec = EquilibriumSpec(targets=("downstream",), frozen={"upstream": 8.0})
    solution = equilibrium.solve_equilibrium(model, spec)
    assert list(solution.values) == ["downstream"]
    assert solution.values["downstream"] == pytest.approx(4.0, rel=1e-6)


def test_no_convergence():
    model = _balance()
    spec = EquilibriumSpec(targets=("upstream",), max_iterations=3)
    with pytest.raises(NoConvergence) as excinfo:
        equilibrium.solve_equilibrium(model, spec)
    assert excinfo.value.iterations == 3
    assert excinfo.value.stock == "upstream"
    assert "no equilibrium after 3 iterations" in str(excinfo.value)


def test_spec_validation():
    with pytest.raises(ValueError, match="tolerance must be positive"):
        EquilibriumSpec(targets=("s",), tolerance=0)
    with pytest.raises(ValueError, match="damping must be in"):
        EquilibriumSpec(targets=("s",), damping=1.5)
    with pytest.raises(ValueError, match="at least 1"):
        EquilibriumSpec(targets=("s",), max_iterations=0)


def test_targets_must_be_stocks():
    model = _balance()
    with pytest.raises(ValueError, match="Unknown target stock 'nothing'"):
        equilibrium.solve_equilibrium(model, EquilibriumSpec(targets=("nothing",)))
    with pytest.raises(ValueError, match="'moving' is not a stock"):
        equilibrium.solve_equilibrium(model, EquilibriumSpec(targets=("moving",)))
    with pytest.raises(ValueError, match="both solved and frozen"):
        equilibrium.solve_equilibrium(
            model,
            EquilibriumSpec(targets=("upstream",), frozen={"upstream": 1.0}),
        )


def test_initialize_and_verify():
    model = equilibrium.initialize(_balance())
    assert model.initials["upstream"] == pytest.approx(40.0)

    report = equilibrium.verify_equilibrium(
        model, model.initials, horizon=20.0, tol=1e-9
    )
    assert report.passed
    assert report.worst < 1e-9
    assert set(report.drifts) == {"upstream", "downstream"}


def test_verify_reports_drift():
    model = _balance()
    report = equilibrium.verify_equilibrium(
        model, {"upstream": 10.0, "downstream": 10.0}, horizon=5.0, tol=1e-6
    )
    assert not report.passed
    assert "upstream" in report.failures


def test_verify_named_metrics_use_absolute_drift():
    model = equilibrium.initialize(_balance())
    report = equilibrium.verify_equilibrium(
        model, model.initials, horizon=10.0, tol=1e-9, metrics=["moving"]
    )
    assert list(report.drifts) == ["moving"]
    assert report.passed


def test_initialize_without_block_is_identity():
    model = util.load("parameter k = 1")
    assert equilibrium.initialize(model) is model


def test_table():
    model = _balance()
    table = equilibrium.solve_equilibrium(
        model, model.definition.equilibrium
    ).table()
    lines = table.strip().splitlines()
    assert lines[0].split() == ["stock", "value", "residual"]
    assert lines[1].split()[0] == "upstream"
    assert lines[2].split()[0] == "downstream"
    assert table.rstrip().endswith("iterations.")
