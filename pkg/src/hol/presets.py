"""Named weights and kernels shared by the command line and the verification suites.

A weight argument is one of
  * a preset name: ``one``, ``zero``, ``exp``, ``sqrt``, ``ind01``;
  * ``pow:ALPHA`` for x^ALPHA, ``exp:BETA`` for e^(-BETA x), ``ind:A:B`` for the
    indicator of [A, B);
  * an inline JSON object (``{"kind": "exp", "beta": 2}``) or a path to a JSON file
    holding one, in the format read by :func:`hol.realfun.weight_from_json`.
"""

from __future__ import annotations

import json
import os

from .kernels import Kernel, kernel_from_json
from .realfun import PreconditionError, Weight, constant, exponential, indicator, power, weight_from_json

WEIGHT_PRESETS = {
    "one": lambda: constant(1.0),
    "zero": lambda: Weight([]),
    "exp": lambda: exponential(1.0),
    "sqrt": lambda: power(0.5),
    "ind01": lambda: indicator(0.0, 1.0),
}

KERNEL_PRESETS = ("indicator", "one", "difference", "log_ratio")

# the weights used by the level-identity suite
LEVEL_PRESETS = ("one", "sqrt", "exp", "ind01")


def _load_json(text: str) -> dict:
    if text.lstrip().startswith("{"):
        return json.loads(text)
    with open(text, encoding="utf-8") as fh:
        return json.load(fh)


def parse_weight(text: str) -> Weight:
    key = text.strip()
    if key in WEIGHT_PRESETS:
        return WEIGHT_PRESETS[key]()
    head, _, rest = key.partition(":")
    try:
        if head == "pow" and rest:
            return power(float(rest))
        if head == "exp" and rest:
            return exponential(float(rest))
        if head == "ind" and rest:
            a, b = rest.split(":")
            return indicator(float(a), float(b))
    except ValueError as exc:
        raise PreconditionError(f"cannot parse weight {text!r}: {exc}") from None
    if key.startswith("{") or os.path.exists(key):
        return weight_from_json(_load_json(key))
    raise PreconditionError(f"unknown weight {text!r}; presets: {', '.join(WEIGHT_PRESETS)}")


def parse_kernel(text: str) -> Kernel:
    key = text.strip()
    if key.startswith("{") or os.path.exists(key):
        return kernel_from_json(_load_json(key))
    return kernel_from_json(key)
