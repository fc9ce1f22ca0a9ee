# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""
Diagnostics reported by the model language front end.
"""

from dataclasses import dataclass
import enum


class Severity(enum.Enum):
    error = "error"
    warning = "warning"


@dataclass(frozen=True)
class Position:
    """
    A 1-based line/column location in a named source.
    """

    source: str
    line: int
    column: int


@dataclass(frozen=True)
class Diagnostic:
    """
    A problem found in a model file.

    `code` is the class of problem (`LexError`, `SyntaxError`,
    `UndefinedReference`, ...), so tests and tools can match on it without
    parsing the message.
    """

    severity: Severity
    code: str
    message: str
    line: int
    column: int
    source: str = "<string>"

    @classmethod
    def error(cls, code, message, position):
        return cls(
            Severity.error,
            code,
            message,
            position.line,
            position.column,
            position.source,
        )

    @classmethod
    def warning(cls, code, message, position):
        return cls(
            Severity.warning,
            code,
            message,
            position.line,
            position.column,
            position.source,
        )

    @property
    def is_error(self):
        return self.severity is Severity.error

    def __str__(self):
        return (
            f"{self.source}:{self.line}:{self.column}: "
            f"{self.severity.value}: {self.message}"
        )


def has_errors(diagnostics):
    return any(diagnostic.is_error for diagnostic in diagnostics)
