# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Classes for each of the kinds of model variables, and the resolved model
definition they make up.
"""

from dataclasses import dataclass, field
import enum
import itertools
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .diagnostics import Position


TIME = "time"


class DimensionMismatch(ValueError):
    """
    A variable is indexed by a dimension it does not declare, or a subscript
    does not fit the dimension at its position.
    """

    def __init__(self, message, variable=None):
        self.variable = variable
        super().__init__(message)


class VariableKind(enum.Enum):
    stock = "stock"
    flow = "flow"
    auxiliary = "aux"
    parameter = "parameter"


def instance_key(name, elements=()):
    """
    The key of one expanded variable instance: ``name`` for scalars,
    ``name[a,b]`` for subscripted variables.
    """
    if not elements:
        return name
    return f"{name}[{','.join(elements)}]"


def split_key(key):
    """
    Inverse of `instance_key`: ``"trust[blackAmericans]"`` ->
    ``("trust", ("blackAmericans",))``.
    """
    name, bracket, rest = key.partition("[")
    if not bracket:
        return name, ()
    return name, tuple(rest.rstrip("]").split(","))


@dataclass(frozen=True)
class Dimension:
    name: str
    elements: Tuple[str, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError(f"Dimension '{self.name}' has no elements")
        duplicates = sorted(
            element
            for element in set(self.elements)
            if self.elements.count(element) > 1
        )
        if duplicates:
            raise ValueError(
                f"Dimension '{self.name}' repeats element(s) {', '.join(duplicates)}"
            )


@dataclass(frozen=True)
class LookupTable:
    """
    A piecewise-linear function given by its points.  Outside the x range the
    first or last y is used.
    """

    name: str
    points: Tuple[Tuple[float, float], ...]
    _xs: Any = field(init=False, repr=False, compare=False)
    _ys: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError(f"Lookup '{self.name}' needs at least 2 points")
        xs = np.array([float(x) for x, _ in self.points])
        if np.any(np.diff(xs) <= 0):
            raise ValueError(
                f"Lookup '{self.name}' x values must be strictly increasing"
            )
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_ys", np.array([float(y) for _, y in self.points]))

    def __call__(self, x):
        return float(np.interp(x, self._xs, self._ys))


@dataclass(frozen=True)
class VariableDef:
    """
    One declared variable.

    Parameters carry `values`, keyed by element tuple (``()`` for scalars).
    Stocks carry `initial`, `inflows` and `outflows`; other kinds carry
    `equation`.
    """

    name: str
    kind: VariableKind
    dims: Tuple[str, ...] = ()
    equation: Any = None
    initial: Any = None
    inflows: Tuple[str, ...] = ()
    outflows: Tuple[str, ...] = ()
    nonneg: bool = False
    upper: Optional[float] = None
    values: Dict[Tuple[str, ...], float] = field(default_factory=dict)
    units: Optional[str] = None
    position: Optional[Position] = field(default=None, compare=False, repr=False)


@dataclass
class ModelDefinition:
    """
    A resolved model: every reference points at a declared variable.
    """

    dimensions: Dict[str, Dimension] = field(default_factory=dict)
    variables: Dict[str, VariableDef] = field(default_factory=dict)
    lookups: Dict[str, LookupTable] = field(default_factory=dict)
    scenarios: Dict[str, Any] = field(default_factory=dict)
    equilibrium: Any = None

    def element_tuples(self, dims):
        return list(
            itertools.product(*(self.dimensions[dim].elements for dim in dims))
        )

    def instance_keys(self, name):
        variable = self.variables[name]
        return [
            instance_key(name, elements)
            for elements in self.element_tuples(variable.dims)
        ]

    def of_kind(self, kind):
        return [
            variable for variable in self.variables.values() if variable.kind is kind
        ]


def expand_reference(definition, name, subscripts, binding, aggregate=False):
    """
    Expand a reference to `name` made inside an equation instance whose own
    dimensions are bound to elements by `binding`.

    Returns the list of instance keys the reference reads: exactly one,
    except inside `sum`/`mean` (`aggregate`) where a dimension name selects
    the whole slice.

    :raises DimensionMismatch: the subscripts do not fit.
    """
    target = definition.variables[name]
    if not subscripts:
        missing = [dim for dim in target.dims if dim not in binding]
        if missing:
            raise DimensionMismatch(
                f"'{name}' is subscripted by '{missing[0]}', which is not a "
                f"dimension of the referencing variable"
            )
        return [instance_key(name, tuple(binding[dim] for dim in target.dims))]

    if len(subscripts) != len(target.dims):
        raise DimensionMismatch(
            f"'{name}' has {len(target.dims)} dimension(s) but is used with "
            f"{len(subscripts)} subscript(s)"
        )

    choices = []
    for dim, subscript in zip(target.dims, subscripts):
        dimension = definition.dimensions[dim]
        if subscript == "*":
            if dim not in binding:
                raise DimensionMismatch(
                    f"'{name}[*]' used outside an equation over '{dim}'"
                )
            choices.append([binding[dim]])
        elif subscript == dim:
            if aggregate:
                choices.append(list(dimension.elements))
            elif dim in binding:
                choices.append([binding[dim]])
            else:
                raise DimensionMismatch(
                    f"'{name}[{dim}]' selects the whole dimension; "
                    f"use sum() or mean()"
                )
        elif subscript in dimension.elements:
            choices.append([subscript])
        elif subscript in definition.dimensions:
            raise DimensionMismatch(
                f"'{name}' is indexed by '{dim}', not '{subscript}'"
            )
        else:
            raise DimensionMismatch(
                f"'{subscript}' is not an element of dimension '{dim}'"
            )

    return [instance_key(name, elements) for elements in itertools.product(*choices)]
