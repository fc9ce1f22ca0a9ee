# -*- coding: utf-8 -*-

# Any copyright is dedicated to the Public Domain.
# http://creativecommons.org/publicdomain/zero/1.0/

import textwrap

import numpy as np

from sdflow import engine
from sdflow import loader
from sdflow import parser


def parse(text):
    """Parse dedented model text, returning (source_model, diagnostics)."""
    result = parser.parse_text(textwrap.dedent(text))
    diagnostics = list(result)
    return result.value, diagnostics


def diagnostics(text):
    """Every diagnostic of loading dedented model text."""
    return list(loader.load_text(textwrap.dedent(text)))


def load(text):
    """Load dedented model text that must have no errors."""
    result = loader.load_text(textwrap.dedent(text))
    errors = [d for d in result if d.is_error]
    assert errors == []
    return result.value


def make_run(times, scenario="baseline", **series):
    """A `RunResult` from plain lists; `a__b=` gives the key `a[b]`."""
    converted = {}
    for name, values in series.items():
        family, _, group = name.partition("__")
        key = f"{family}[{group}]" if group else family
        converted[key] = np.array(values, dtype=float)
    return engine.RunResult(
        times=np.array(times, dtype=float), series=converted, scenario=scenario
    )
