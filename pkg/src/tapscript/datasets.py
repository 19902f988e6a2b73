"""Embedded datasets loadable with data()."""

from __future__ import annotations

from .errors import EvalError
from .values import NumericVector, Table, Value

_WOMEN_HEIGHT = [58, 59, 60, 61, 62, 63, 64, 65, 66, 67, 68, 69, 70, 71, 72]
_WOMEN_WEIGHT = [115, 117, 120, 123, 126, 129, 132, 135, 139, 142, 146, 150, 154, 159, 164]


def make_women() -> Value:
    """Average heights (in) and weights (lb) of 15 American women."""
    return Value(
        Table(
            {
                "height": NumericVector([float(x) for x in _WOMEN_HEIGHT]),
                "weight": NumericVector([float(x) for x in _WOMEN_WEIGHT]),
            }
        )
    )


_DATASETS = {"women": make_women}


def load_dataset(name: str) -> Value:
    if name not in _DATASETS:
        raise EvalError(f"no dataset named '{name}'")
    return _DATASETS[name]()
