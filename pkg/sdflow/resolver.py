# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Semantic checks that turn a parsed `syntax.SourceModel` into a
`model.ModelDefinition`.
"""

from .diagnostics import Diagnostic, has_errors
from .equilibrium import EquilibriumSpec
from .model import (
    TIME,
    Dimension,
    DimensionMismatch,
    LookupTable,
    ModelDefinition,
    VariableDef,
    VariableKind,
    expand_reference,
)
from .scenarios import Overlay, Scenario
from . import syntax
from . import util


# name -> (minimum, maximum) argument count; None means unbounded.
BUILTINS = {
    "safe_divide": (3, 3),
    "min": (1, None),
    "max": (1, None),
    "exp": (1, 1),
    "abs": (1, 1),
    "sum": (1, 1),
    "mean": (1, 1),
}

AGGREGATES = {"sum", "mean"}

KINDS = {
    "aux": VariableKind.auxiliary,
    "flow": VariableKind.flow,
}

EQUILIBRIUM_SETTINGS = {
    "tolerance": ("tolerance", float),
    "damping": ("damping", float),
    "iterations": ("max_iterations", int),
}


def _describe(kind):
    return {
        VariableKind.auxiliary: "auxiliary",
        VariableKind.flow: "flow",
        VariableKind.stock: "stock",
        VariableKind.parameter: "parameter",
    }[kind]


class _Resolver:
    def __init__(self, source_model):
        self.source_model = source_model
        self.definition = ModelDefinition()
        self.diagnostics = []
        self.seen = {}
        # Declared, but rejected; uses of these names are not reported again.
        self.invalid = set()

    def error(self, code, message, position):
        self.diagnostics.append(Diagnostic.error(code, message, position))

    # Declarations

    def declare(self, decl):
        already_seen = self.seen.get(decl.name)
        if already_seen is not None:
            self.error(
                "DuplicateDefinition",
                f"duplicate definition of '{decl.name}' "
                f"(already defined in '{already_seen.source}')",
                decl.position,
            )
            return False
        if decl.name == TIME:
            self.error(
                "DuplicateDefinition", f"'{TIME}' is a built-in name", decl.position
            )
            return False
        self.seen[decl.name] = decl.position
        return True

    def check_dims(self, decl):
        for dim in decl.dims:
            if dim in self.invalid:
                return False
            if dim not in self.definition.dimensions:
                self.error(
                    "UndefinedReference",
                    f"undefined dimension '{dim}' in '{decl.name}'",
                    decl.position,
                )
                return False
        return True

    def resolve_dimension(self, decl):
        try:
            dimension = Dimension(decl.name, decl.elements)
        except ValueError as e:
            self.error("InvalidValue", str(e), decl.position)
            self.invalid.add(decl.name)
            return
        self.definition.dimensions[decl.name] = dimension

    def resolve_lookup(self, decl):
        points = tuple((x.value, y.value) for x, y in decl.points)
        try:
            table = LookupTable(decl.name, points)
        except ValueError as e:
            self.error("InvalidLookup", str(e), decl.position)
            self.invalid.add(decl.name)
            return
        self.definition.lookups[decl.name] = table

    def resolve_parameter(self, decl):
        if not self.check_dims(decl):
            return
        values = {}
        if decl.value is not None:
            values[()] = decl.value.value
        else:
            if len(decl.dims) != 1:
                self.error(
                    "DimensionMismatch",
                    f"per-element values of '{decl.name}' need exactly one "
                    f"dimension",
                    decl.position,
                )
                return
            dimension = self.definition.dimensions[decl.dims[0]]
            for element, number in decl.per_element:
                if element not in dimension.elements:
                    self.error(
                        "DimensionMismatch",
                        f"'{element}' is not an element of dimension "
                        f"'{dimension.name}'",
                        number.position or decl.position,
                    )
                    return
                values[(element,)] = number.value
            missing = [
                element for element in dimension.elements if (element,) not in values
            ]
            if missing:
                self.error(
                    "InvalidValue",
                    f"'{decl.name}' has no value for {', '.join(missing)}",
                    decl.position,
                )
                return
        self.add_variable(
            VariableDef(
                decl.name,
                VariableKind.parameter,
                decl.dims,
                values=values,
                units=decl.units,
                position=decl.position,
            )
        )

    def resolve_variable(self, decl):
        if not self.check_dims(decl):
            return
        self.add_variable(
            VariableDef(
                decl.name,
                KINDS[decl.kind],
                decl.dims,
                equation=decl.equation,
                units=decl.units,
                position=decl.position,
            )
        )

    def resolve_stock(self, decl):
        if not self.check_dims(decl):
            return
        self.add_variable(
            VariableDef(
                decl.name,
                VariableKind.stock,
                decl.dims,
                initial=decl.initial,
                inflows=decl.inflows,
                outflows=decl.outflows,
                nonneg=decl.nonneg,
                upper=None if decl.upper is None else decl.upper.value,
                units=decl.units,
                position=decl.position,
            )
        )

    def add_variable(self, variable):
        self.definition.variables[variable.name] = variable

    # Expressions

    def check_expression(self, node, owner, binding):
        if isinstance(node, syntax.Number):
            return
        if isinstance(node, syntax.Reference):
            self.check_reference(node, owner, binding)
        elif isinstance(node, syntax.Unary):
            self.check_expression(node.operand, owner, binding)
        elif isinstance(node, syntax.Binary):
            self.check_expression(node.left, owner, binding)
            self.check_expression(node.right, owner, binding)
        elif isinstance(node, syntax.Conditional):
            self.check_expression(node.condition, owner, binding)
            self.check_expression(node.then, owner, binding)
            self.check_expression(node.otherwise, owner, binding)
        elif isinstance(node, syntax.Call):
            self.check_call(node, owner, binding)

    def check_name(self, node):
        """
        Report references to names that are not variables.  Returns True if
        `node.name` is a variable.
        """
        name = node.name
        if name in self.definition.variables:
            return True
        if name in self.definition.lookups:
            self.error(
                "KindMismatch",
                f"lookup '{name}' must be called, e.g. {name}(x)",
                node.position,
            )
        elif name in self.definition.dimensions:
            self.error(
                "KindMismatch",
                f"dimension '{name}' can not be used as a value",
                node.position,
            )
        elif name not in self.seen:
            self.error(
                "UndefinedReference", f"undefined reference '{name}'", node.position
            )
        return False

    def check_reference(self, node, owner, binding, aggregate=False):
        if node.name == TIME and not node.subscripts:
            return
        if not self.check_name(node):
            return
        try:
            expand_reference(
                self.definition, node.name, node.subscripts, binding, aggregate
            )
        except DimensionMismatch as e:
            self.error("DimensionMismatch", f"in '{owner}': {e}", node.position)

    def check_call(self, node, owner, binding):
        name = node.function
        if name in self.definition.lookups:
            arity = (1, 1)
        elif name in BUILTINS:
            arity = BUILTINS[name]
        elif name in self.definition.variables:
            self.error(
                "KindMismatch", f"'{name}' is not a function", node.position
            )
            return
        elif name in self.invalid:
            return
        else:
            self.error(
                "UndefinedReference", f"undefined function '{name}'", node.position
            )
            return

        low, high = arity
        if len(node.args) < low or (high is not None and len(node.args) > high):
            expected = str(low) if low == high else f"at least {low}"
            self.error(
                "InvalidCall",
                f"{name}() takes {expected} argument(s), got {len(node.args)}",
                node.position,
            )
            return

        if name in AGGREGATES:
            (argument,) = node.args
            if not isinstance(argument, syntax.Reference):
                self.error(
                    "InvalidCall",
                    f"{name}() takes a variable reference such as x[dimension]",
                    node.position,
                )
                return
            self.check_reference(argument, owner, binding, aggregate=True)
            return

        for arg in node.args:
            self.check_expression(arg, owner, binding)

    def check_equations(self):
        for variable in self.definition.variables.values():
            binding = {
                dim: self.definition.dimensions[dim].elements[0]
                for dim in variable.dims
            }
            for expression in (variable.equation, variable.initial):
                if expression is not None:
                    self.check_expression(expression, variable.name, binding)

    def check_stock_flows(self):
        for stock in self.definition.of_kind(VariableKind.stock):
            for direction in ("inflows", "outflows"):
                for name in getattr(stock, direction):
                    flow = self.definition.variables.get(name)
                    if flow is None:
                        if name not in self.seen:
                            self.error(
                                "UndefinedReference",
                                f"stock '{stock.name}' lists undefined flow '{name}'",
                                stock.position,
                            )
                        continue
                    if flow.kind is not VariableKind.flow:
                        self.error(
                            "KindMismatch",
                            f"stock '{stock.name}' lists {_describe(flow.kind)} "
                            f"'{name}' in its {direction}; only flows can",
                            stock.position,
                        )
                        continue
                    extra = [dim for dim in flow.dims if dim not in stock.dims]
                    if extra:
                        self.error(
                            "DimensionMismatch",
                            f"flow '{name}' is subscripted by '{extra[0]}', "
                            f"which stock '{stock.name}' does not declare",
                            stock.position,
                        )

    # Scenarios and equilibrium

    def check_parameter_target(self, name, element, position):
        variable = self.definition.variables.get(name)
        if variable is None:
            self.error("UndefinedReference", f"undefined parameter '{name}'", position)
            return False
        if variable.kind is not VariableKind.parameter:
            self.error(
                "KindMismatch",
                f"'{name}' is a {_describe(variable.kind)}; only parameters can "
                f"be set by scenarios",
                position,
            )
            return False
        if element is not None:
            if len(variable.dims) != 1:
                self.error(
                    "DimensionMismatch",
                    f"'{name}[{element}]' does not match the dimensions of '{name}'",
                    position,
                )
                return False
            dimension = self.definition.dimensions[variable.dims[0]]
            if element not in dimension.elements:
                self.error(
                    "DimensionMismatch",
                    f"'{element}' is not an element of dimension '{dimension.name}'",
                    position,
                )
                return False
        return True

    def resolve_scenario(self, decl):
        overlays = []
        switches = {}
        for item in decl.items:
            if isinstance(item, syntax.SwitchDecl):
                if self.check_parameter_target(item.name, None, item.position):
                    switches[item.name] = item.value.value
                continue
            if not self.check_parameter_target(
                item.target, item.element, item.position
            ):
                continue
            target = item.target
            if item.element is not None:
                target = f"{target}[{item.element}]"
            try:
                overlays.append(
                    Overlay.make(item.shape, target, [arg.value for arg in item.args])
                )
            except ValueError as e:
                self.error("InvalidCall", str(e), item.position)
        self.definition.scenarios[decl.name] = Scenario(
            decl.name, tuple(overlays), switches
        )

    def resolve_equilibrium(self, decl):
        for name in decl.targets:
            variable = self.definition.variables.get(name)
            if variable is None:
                self.error(
                    "UndefinedReference",
                    f"undefined equilibrium target '{name}'",
                    decl.position,
                )
                return
            if variable.kind is not VariableKind.stock:
                self.error(
                    "KindMismatch",
                    f"equilibrium target '{name}' is a {_describe(variable.kind)}, "
                    f"not a stock",
                    decl.position,
                )
                return
        settings = {}
        for key, number in decl.settings:
            field_name, convert = EQUILIBRIUM_SETTINGS[key]
            settings[field_name] = convert(number.value)
        try:
            self.definition.equilibrium = EquilibriumSpec(decl.targets, **settings)
        except ValueError as e:
            self.error("InvalidValue", str(e), decl.position)

    def resolve(self):
        declarations = self.source_model.declarations
        accepted = [decl for decl in declarations if self.declare(decl)]

        # Dimensions and lookups first: variables and calls refer to them.
        for decl in accepted:
            if isinstance(decl, syntax.DimensionDecl):
                self.resolve_dimension(decl)
            elif isinstance(decl, syntax.LookupDecl):
                self.resolve_lookup(decl)

        for decl in accepted:
            if isinstance(decl, syntax.ParameterDecl):
                self.resolve_parameter(decl)
            elif isinstance(decl, syntax.VariableDecl):
                self.resolve_variable(decl)
            elif isinstance(decl, syntax.StockDecl):
                self.resolve_stock(decl)

        self.check_equations()
        self.check_stock_flows()

        for decl in accepted:
            if isinstance(decl, syntax.ScenarioDecl):
                self.resolve_scenario(decl)
            elif isinstance(decl, syntax.EquilibriumDecl):
                self.resolve_equilibrium(decl)

        return self.definition


@util.keep_value
def resolve(source_model):
    """
    Resolve every name in `source_model` and check dimension usage.

    The result is a generator over diagnostics.  The `model.ModelDefinition`
    is on `.value` when there were no errors, otherwise it is None.
    """
    resolver = _Resolver(source_model)
    definition = resolver.resolve()
    yield from resolver.diagnostics
    if has_errors(resolver.diagnostics):
        return None
    return definition
