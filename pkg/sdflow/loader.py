# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
High-level interface for turning `.sdm` files into compiled models.
"""

from .compiler import CycleError, DimensionMismatch, compile_model
from .diagnostics import Diagnostic, Position
from . import parser
from . import resolver
from . import util


def _position_of(definition, name, source):
    variable = definition.variables.get(name) if name is not None else None
    if variable is not None and variable.position is not None:
        return variable.position
    return Position(source, 1, 1)


def compile_definition(definition, source):
    """
    Compile a resolved definition, reporting compile errors as diagnostics
    positioned at the first variable involved.

    :returns: a ``(model, diagnostic)`` pair, one of which is None.
    """
    try:
        return compile_model(definition), None
    except CycleError as e:
        position = _position_of(definition, e.names[0], source)
        return None, Diagnostic.error("CycleError", str(e), position)
    except DimensionMismatch as e:
        position = _position_of(definition, e.variable, source)
        message = str(e) if e.variable is None else f"in '{e.variable}': {e}"
        return None, Diagnostic.error("DimensionMismatch", message, position)


def _forward(result, errors):
    """
    Re-yield the diagnostics of a value-keeping generator, noting whether any
    of them is an error.
    """
    for diagnostic in result:
        if diagnostic.is_error:
            errors.append(diagnostic)
        yield diagnostic
    return result.value


@util.keep_value
def load_source(source_model):
    """
    Resolve and compile an already parsed model.
    """
    errors = []
    definition = yield from _forward(resolver.resolve(source_model), errors)
    if errors or definition is None:
        return None
    model, error = compile_definition(definition, source_model.source)
    if error is not None:
        yield error
    return model


@util.keep_value
def load_model(filepaths):
    """
    Parse, resolve and compile one or more `.sdm` files.

    The result is a generator over every diagnostic found on the way.  If
    there are no errors, the `compiler.CompiledModel` is on `.value`.  For
    example::

      result = loader.load_model([Path("model.sdm")])
      for diagnostic in result:
          print(diagnostic)
      model = result.value

    :raises OSError: a file can not be read.
    """
    errors = []
    source_model = yield from _forward(parser.parse_files(filepaths), errors)
    if errors:
        return None
    model = yield from load_source(source_model)
    return model


@util.keep_value
def load_text(text, source="<string>"):
    """
    Like `load_model`, for model text held in memory.
    """
    errors = []
    source_model = yield from _forward(parser.parse_text(text, source), errors)
    if errors:
        return None
    model = yield from load_source(source_model)
    return model


class ModelError(ValueError):
    """
    A model failed to load; carries every diagnostic found.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def require_model(filepaths):
    """
    Like `load_model`, returning the compiled model directly.  Warnings are
    dropped.

    :raises ModelError: the files have error diagnostics.
    :raises OSError: a file can not be read.
    """
    result = load_model(filepaths)
    errors = [diagnostic for diagnostic in result if diagnostic.is_error]
    if errors or result.value is None:
        raise ModelError(errors)
    return result.value
