# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Turns a `model.ModelDefinition` into an evaluation plan: every variable is
expanded per subscript combination, and equations become closures over a
dictionary of instance values.
"""

import dataclasses
from dataclasses import dataclass, field
import math
import operator
from typing import Callable, Dict, Optional, Tuple

import networkx as nx

from .model import (
    TIME,
    DimensionMismatch,
    ModelDefinition,
    VariableKind,
    expand_reference,
    instance_key,
    split_key,
)
from . import engine
from . import syntax


__all__ = ["CompiledModel", "CycleError", "DimensionMismatch", "compile_model"]


class CycleError(ValueError):
    """
    Auxiliaries or flows depend on each other instantaneously.
    """

    def __init__(self, names, initialization=False):
        self.names = tuple(names)
        what = "initialization cycle" if initialization else "algebraic cycle"
        super().__init__(f"{what} between {', '.join(self.names)}")


def _power(base, exponent):
    return math.pow(base, exponent)


def _compare(op):
    def compare(a, b):
        return 1.0 if op(a, b) else 0.0

    return compare


BINARY_OPS = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
    "^": _power,
    "<": _compare(operator.lt),
    "<=": _compare(operator.le),
    ">": _compare(operator.gt),
    ">=": _compare(operator.ge),
    "==": _compare(operator.eq),
    "!=": _compare(operator.ne),
}

FUNCTIONS = {
    "exp": math.exp,
    "abs": abs,
}

AGGREGATES = {"sum", "mean"}


@dataclass(frozen=True)
class Instance:
    key: str
    name: str
    kind: VariableKind
    elements: Tuple[str, ...] = ()


@dataclass(frozen=True)
class StockPlan:
    key: str
    initial: Callable
    inflows: Tuple[str, ...] = ()
    outflows: Tuple[str, ...] = ()
    nonneg: bool = False
    upper: Optional[float] = None


@dataclass(frozen=True)
class CompiledModel:
    """
    An immutable evaluation plan.

    `order` lists every auxiliary and flow instance so that each one comes
    after the auxiliaries and flows it reads.  `init_order` does the same for
    start-up, where stock initial values may read auxiliaries and flows.
    Scenarios and solved initial values produce new plans through
    `with_overlays`, `with_parameters` and `with_initials`.
    """

    definition: ModelDefinition
    instances: Dict[str, Instance]
    parameters: Dict[str, float]
    equations: Dict[str, Callable]
    order: Tuple[str, ...]
    stocks: Dict[str, StockPlan]
    init_order: Tuple[str, ...]
    overlays: Tuple[Tuple[str, object], ...] = ()
    initials: Dict[str, float] = field(default_factory=dict)

    def keys_for(self, target, kinds=None):
        """
        Instance keys named by `target`: either one instance key or a whole
        variable family.

        :raises KeyError: nothing matches.
        """
        if target in self.instances:
            keys = [target]
        elif target in self.definition.variables:
            keys = self.definition.instance_keys(target)
        else:
            raise KeyError(target)
        if kinds is not None:
            keys = [key for key in keys if self.instances[key].kind in kinds]
        return keys

    @property
    def stock_keys(self):
        return tuple(self.stocks)

    def parameter_values(self, time, overrides=None):
        """
        Parameter instance values at `time`, after `overrides` and then any
        timed overlays.
        """
        values = dict(self.parameters)
        if overrides:
            values.update(overrides)
        for key, overlay in self.overlays:
            values[key] = overlay.apply(values[key], time)
        return values

    def with_overlays(self, overlays):
        return dataclasses.replace(self, overlays=self.overlays + tuple(overlays))

    def without_overlays(self):
        return dataclasses.replace(self, overlays=())

    def with_parameters(self, values):
        parameters = dict(self.parameters)
        parameters.update(values)
        return dataclasses.replace(self, parameters=parameters)

    def with_initials(self, initials):
        merged = dict(self.initials)
        merged.update(initials)
        return dataclasses.replace(self, initials=merged)


class _Compiler:
    def __init__(self, definition):
        self.definition = definition
        self.lookups = definition.lookups

    def compile(self, node, binding, owner, deps):
        """
        Build a closure for `node`; instance keys it reads are added to `deps`.
        """
        if isinstance(node, syntax.Number):
            constant = float(node.value)
            return lambda v: constant

        if isinstance(node, syntax.Reference):
            if node.name == TIME and not node.subscripts:
                deps.add(TIME)
                return lambda v: v[TIME]
            if node.name not in self.definition.variables:
                raise ValueError(f"'{owner}' references undefined '{node.name}'")
            (key,) = expand_reference(
                self.definition, node.name, node.subscripts, binding
            )
            deps.add(key)
            return lambda v: v[key]

        if isinstance(node, syntax.Unary):
            operand = self.compile(node.operand, binding, owner, deps)
            return lambda v: -operand(v)

        if isinstance(node, syntax.Binary):
            op = BINARY_OPS[node.op]
            left = self.compile(node.left, binding, owner, deps)
            right = self.compile(node.right, binding, owner, deps)
            return lambda v: op(left(v), right(v))

        if isinstance(node, syntax.Conditional):
            condition = self.compile(node.condition, binding, owner, deps)
            then = self.compile(node.then, binding, owner, deps)
            otherwise = self.compile(node.otherwise, binding, owner, deps)
            return lambda v: then(v) if condition(v) != 0.0 else otherwise(v)

        if isinstance(node, syntax.Call):
            return self.compile_call(node, binding, owner, deps)

        raise TypeError(f"Unknown expression node {node!r}")

    def compile_call(self, node, binding, owner, deps):
        name = node.function
        if name in AGGREGATES:
            (argument,) = node.args
            keys = expand_reference(
                self.definition,
                argument.name,
                argument.subscripts,
                binding,
                aggregate=True,
            )
            deps.update(keys)
            count = float(len(keys))
            if name == "sum":
                return lambda v: math.fsum(v[key] for key in keys)
            return lambda v: math.fsum(v[key] for key in keys) / count

        args = [self.compile(arg, binding, owner, deps) for arg in node.args]

        if name in self.lookups:
            table = self.lookups[name]
            (x,) = args
            return lambda v: engine.eval_lookup(table, x(v))
        if name == "safe_divide":
            num, den, fallback = args
            return lambda v: engine.safe_divide(num(v), den(v), fallback(v))
        if name == "min":
            return lambda v: min(arg(v) for arg in args)
        if name == "max":
            return lambda v: max(arg(v) for arg in args)
        if name in FUNCTIONS:
            function = FUNCTIONS[name]
            (x,) = args
            return lambda v: function(x(v))
        raise ValueError(f"'{owner}' calls unknown function '{name}'")


def _zero(values):
    return 0.0


def _ordered(graph, rank, initialization=False):
    if not nx.is_directed_acyclic_graph(graph):
        cycle = min(nx.simple_cycles(graph), key=len)
        names = sorted(set(split_key(key)[0] for key in cycle))
        raise CycleError(names, initialization)
    return tuple(nx.lexicographical_topological_sort(graph, key=rank.__getitem__))


def compile_model(definition):
    """
    Compile a resolved model into a `CompiledModel`.

    :raises CycleError: auxiliaries/flows form an instantaneous cycle, or
        stock initial values depend on each other in a cycle.
    :raises DimensionMismatch: a reference does not fit the dimensions of
        the variable it names.
    """
    compiler = _Compiler(definition)
    instances = {}
    parameters = {}
    equations = {}
    dependencies = {}
    stocks = {}
    initial_dependencies = {}

    for variable in definition.variables.values():
        try:
            for elements in definition.element_tuples(variable.dims):
                key = instance_key(variable.name, elements)
                instances[key] = Instance(key, variable.name, variable.kind, elements)
                binding = dict(zip(variable.dims, elements))

                if variable.kind is VariableKind.parameter:
                    if elements in variable.values:
                        parameters[key] = float(variable.values[elements])
                    else:
                        parameters[key] = float(variable.values[()])

                elif variable.kind is VariableKind.stock:
                    deps = set()
                    if variable.initial is None:
                        initial = _zero
                    else:
                        initial = compiler.compile(variable.initial, binding, key, deps)
                    initial_dependencies[key] = deps
                    flows = {}
                    for direction in ("inflows", "outflows"):
                        flows[direction] = tuple(
                            expand_reference(definition, flow, (), binding)[0]
                            for flow in getattr(variable, direction)
                        )
                    stocks[key] = StockPlan(
                        key,
                        initial,
                        flows["inflows"],
                        flows["outflows"],
                        variable.nonneg,
                        variable.upper,
                    )

                else:
                    deps = set()
                    equations[key] = compiler.compile(
                        variable.equation, binding, key, deps
                    )
                    dependencies[key] = deps
        except DimensionMismatch as e:
            raise DimensionMismatch(str(e), variable.name) from e

    rank = {key: index for index, key in enumerate(instances)}

    graph = nx.DiGraph()
    graph.add_nodes_from(equations)
    for key, deps in dependencies.items():
        graph.add_edges_from((dep, key) for dep in deps if dep in equations)
    order = _ordered(graph, rank)

    init_graph = nx.DiGraph()
    init_graph.add_nodes_from(equations)
    init_graph.add_nodes_from(stocks)
    for key, deps in list(dependencies.items()) + list(initial_dependencies.items()):
        init_graph.add_edges_from(
            (dep, key) for dep in deps if dep in equations or dep in stocks
        )
    init_order = _ordered(init_graph, rank, initialization=True)

    return CompiledModel(
        definition=definition,
        instances=instances,
        parameters=parameters,
        equations=equations,
        order=order,
        stocks=stocks,
        init_order=init_order,
    )
