from __future__ import annotations

import numpy as np


def to_list(value_or_list) -> list:
    """Wrap a scalar grid value into a one element list, leave sequences alone."""
    if value_or_list is None:
        return []
    if isinstance(value_or_list, (list, tuple, np.ndarray)):
        return list(value_or_list)
    return [value_or_list]


def to_float_array(values) -> np.ndarray:
    """Return a fresh 1-D float64 copy of values."""
    return np.array(values, dtype=np.float64).reshape(-1)


def to_cell(value) -> str:
    """
    Render one CSV cell.

    Floats use the shortest repr that round-trips, None is an empty cell and booleans are 0/1.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def to_jsonable(value):
    """Turn numpy scalars and arrays into plain Python objects json can write."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value
