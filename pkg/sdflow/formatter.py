# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Canonical pretty-printer for `.sdm` syntax trees.

Formatting is a fixed point: parsing the output and formatting it again gives
the same bytes.
"""

from . import syntax


INDENT = "    "

# Binding strength of each expression form, loosest first.
CONDITIONAL, COMPARISON, ADDITIVE, MULTIPLICATIVE, UNARY, POWER, ATOM = range(7)

BINARY_PRECEDENCE = {
    "<": COMPARISON,
    "<=": COMPARISON,
    ">": COMPARISON,
    ">=": COMPARISON,
    "==": COMPARISON,
    "!=": COMPARISON,
    "+": ADDITIVE,
    "-": ADDITIVE,
    "*": MULTIPLICATIVE,
    "/": MULTIPLICATIVE,
    "^": POWER,
}


def _precedence(node):
    if isinstance(node, syntax.Conditional):
        return CONDITIONAL
    if isinstance(node, syntax.Binary):
        return BINARY_PRECEDENCE[node.op]
    if isinstance(node, syntax.Unary):
        return UNARY
    return ATOM


def _number(number):
    if number.text:
        return number.text
    return repr(number.value)


def _wrap(node, needs_parens):
    text = format_expression(node)
    if needs_parens:
        return f"({text})"
    return text


def format_expression(node):
    """
    Print an expression with the minimum parentheses that reproduce the same
    tree.
    """
    if isinstance(node, syntax.Number):
        return _number(node)
    if isinstance(node, syntax.Reference):
        if node.subscripts:
            return f"{node.name}[{', '.join(node.subscripts)}]"
        return node.name
    if isinstance(node, syntax.Call):
        args = ", ".join(format_expression(arg) for arg in node.args)
        return f"{node.function}({args})"
    if isinstance(node, syntax.Unary):
        return node.op + _wrap(node.operand, _precedence(node.operand) < UNARY)
    if isinstance(node, syntax.Conditional):
        return (
            f"if {format_expression(node.condition)} "
            f"then {format_expression(node.then)} "
            f"else {format_expression(node.otherwise)}"
        )
    if isinstance(node, syntax.Binary):
        level = BINARY_PRECEDENCE[node.op]
        if level == POWER:
            # Right associative; the exponent is parsed at unary level.
            left = _wrap(node.left, _precedence(node.left) <= POWER)
            right = _wrap(node.right, _precedence(node.right) < UNARY)
        else:
            # Comparisons do not chain.
            strict = level == COMPARISON
            left = _wrap(
                node.left,
                _precedence(node.left) < level
                or (strict and _precedence(node.left) == level),
            )
            right = _wrap(node.right, _precedence(node.right) <= level)
        return f"{left} {node.op} {right}"
    raise TypeError(f"Not an expression node: {node!r}")


def _subscripts(dims):
    if dims:
        return f"[{', '.join(dims)}]"
    return ""


def _units(units):
    if units is None:
        return ""
    return f' units "{units}"'


def _format_dimension(decl):
    return [f"dimension {decl.name} = {{{', '.join(decl.elements)}}}"]


def _format_parameter(decl):
    head = f"parameter {decl.name}{_subscripts(decl.dims)} = "
    if decl.value is not None:
        value = _number(decl.value)
    else:
        value = ", ".join(
            f"{element}: {_number(number)}" for element, number in decl.per_element
        )
        value = f"{{{value}}}"
    return [head + value + _units(decl.units)]


def _format_lookup(decl):
    points = ", ".join(f"({_number(x)}, {_number(y)})" for x, y in decl.points)
    return [f"lookup {decl.name} = [{points}]{_units(decl.units)}"]


def _format_variable(decl):
    keyword = f"{decl.kind} " if decl.explicit else ""
    return [
        f"{keyword}{decl.name}{_subscripts(decl.dims)} = "
        f"{format_expression(decl.equation)}{_units(decl.units)}"
    ]


def _name_list(names):
    return f"[{', '.join(names)}]"


def _format_stock(decl):
    lines = [f"stock {decl.name}{_subscripts(decl.dims)} {{"]
    if decl.initial is not None:
        lines.append(f"{INDENT}initial = {format_expression(decl.initial)}")
    if decl.inflows:
        lines.append(f"{INDENT}inflows = {_name_list(decl.inflows)}")
    if decl.outflows:
        lines.append(f"{INDENT}outflows = {_name_list(decl.outflows)}")
    if decl.nonneg:
        lines.append(f"{INDENT}nonneg")
    if decl.upper is not None:
        lines.append(f"{INDENT}upper = {_number(decl.upper)}")
    if decl.units is not None:
        lines.append(f'{INDENT}units "{decl.units}"')
    lines.append("}")
    return lines


def _format_scenario(decl):
    lines = [f"scenario {decl.name} {{"]
    for item in decl.items:
        if isinstance(item, syntax.OverlayDecl):
            target = item.target
            if item.element is not None:
                target = f"{target}[{item.element}]"
            args = "".join(f", {_number(arg)}" for arg in item.args)
            lines.append(f"{INDENT}{item.shape}({target}{args})")
        else:
            lines.append(f"{INDENT}{item.name} = {_number(item.value)}")
    lines.append("}")
    return lines


def _format_equilibrium(decl):
    lines = ["equilibrium {"]
    if decl.targets:
        lines.append(f"{INDENT}targets = {_name_list(decl.targets)}")
    for key, value in decl.settings:
        lines.append(f"{INDENT}{key} = {_number(value)}")
    lines.append("}")
    return lines


FORMATTERS = {
    syntax.DimensionDecl: _format_dimension,
    syntax.ParameterDecl: _format_parameter,
    syntax.LookupDecl: _format_lookup,
    syntax.VariableDecl: _format_variable,
    syntax.StockDecl: _format_stock,
    syntax.ScenarioDecl: _format_scenario,
    syntax.EquilibriumDecl: _format_equilibrium,
}


def _comment_lines(comments):
    return [f"// {comment}".rstrip() for comment in comments]


def format_model(model):
    """
    Canonical text of a `syntax.SourceModel`.

    Single-line declarations of the same kind are kept together; block
    declarations, kind changes and commented declarations are separated by a
    blank line.
    """
    lines = []
    previous = None
    for decl in model.declarations:
        body = FORMATTERS[type(decl)](decl)
        if previous is not None:
            separate = (
                decl.comments
                or len(body) > 1
                or previous[1] > 1
                or previous[0] != decl.keyword
            )
            if separate:
                lines.append("")
        lines.extend(_comment_lines(decl.comments))
        lines.extend(body)
        previous = (decl.keyword, len(body))

    if model.trailing_comments:
        if lines:
            lines.append("")
        lines.extend(_comment_lines(model.trailing_comments))

    if not lines:
        return ""
    return "\n".join(lines) + "\n"


format = format_model
