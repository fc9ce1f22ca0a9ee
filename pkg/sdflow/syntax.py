# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Syntax tree of `.sdm` model files.

Node equality is structural: positions, comments and the original spelling of
numbers do not take part in comparisons, so a file and its formatted version
compare equal.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from .diagnostics import Position


def _position():
    return field(default=None, compare=False, repr=False)


def _comments():
    return field(default=(), compare=False, repr=False)


# Expressions


@dataclass(frozen=True)
class Number:
    value: float
    text: str = field(default="", compare=False)
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class Reference:
    """
    A variable reference.  `subscripts` holds, per declared dimension, an
    element name, `*`, or a dimension name (full slice, only valid inside
    `sum`/`mean`).
    """

    name: str
    subscripts: Tuple[str, ...] = ()
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expression"
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expression"
    right: "Expression"
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class Conditional:
    condition: "Expression"
    then: "Expression"
    otherwise: "Expression"
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class Call:
    function: str
    args: Tuple["Expression", ...]
    position: Optional[Position] = _position()


Expression = Union[Number, Reference, Unary, Binary, Conditional, Call]


# Declarations


@dataclass(frozen=True)
class DimensionDecl:
    name: str
    elements: Tuple[str, ...]
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    keyword = "dimension"


@dataclass(frozen=True)
class ParameterDecl:
    """
    `value` is set for a literal applying to every instance; `per_element`
    maps the elements of the single declared dimension to literals.
    """

    name: str
    dims: Tuple[str, ...] = ()
    value: Optional[Number] = None
    per_element: Tuple[Tuple[str, Number], ...] = ()
    units: Optional[str] = None
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    keyword = "parameter"


@dataclass(frozen=True)
class LookupDecl:
    name: str
    points: Tuple[Tuple[Number, Number], ...]
    units: Optional[str] = None
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    keyword = "lookup"


@dataclass(frozen=True)
class VariableDecl:
    """
    An `aux` or `flow`.  `explicit` is False for bare `name = expr` lines.
    """

    kind: str
    name: str
    dims: Tuple[str, ...]
    equation: Expression
    units: Optional[str] = None
    explicit: bool = True
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    @property
    def keyword(self):
        return self.kind


@dataclass(frozen=True)
class StockDecl:
    name: str
    dims: Tuple[str, ...] = ()
    initial: Optional[Expression] = None
    inflows: Tuple[str, ...] = ()
    outflows: Tuple[str, ...] = ()
    nonneg: bool = False
    upper: Optional[Number] = None
    units: Optional[str] = None
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    keyword = "stock"


@dataclass(frozen=True)
class OverlayDecl:
    shape: str
    target: str
    element: Optional[str]
    args: Tuple[Number, ...]
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class SwitchDecl:
    name: str
    value: Number
    position: Optional[Position] = _position()


@dataclass(frozen=True)
class ScenarioDecl:
    name: str
    items: Tuple[Union[OverlayDecl, SwitchDecl], ...] = ()
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    keyword = "scenario"


@dataclass(frozen=True)
class EquilibriumDecl:
    targets: Tuple[str, ...] = ()
    settings: Tuple[Tuple[str, Number], ...] = ()
    position: Optional[Position] = _position()
    comments: Tuple[str, ...] = _comments()

    keyword = "equilibrium"
    name = "equilibrium"


Declaration = Union[
    DimensionDecl,
    ParameterDecl,
    LookupDecl,
    VariableDecl,
    StockDecl,
    ScenarioDecl,
    EquilibriumDecl,
]


@dataclass(frozen=True)
class SourceModel:
    declarations: Tuple[Declaration, ...]
    source: str = field(default="<string>", compare=False)
    trailing_comments: Tuple[str, ...] = _comments()

    def of_type(self, decl_type):
        return [decl for decl in self.declarations if isinstance(decl, decl_type)]

    @property
    def stocks(self):
        return self.of_type(StockDecl)

    @property
    def auxiliaries(self):
        return [
            decl
            for decl in self.of_type(VariableDecl)
            if decl.kind == "aux"
        ]
