"""Dynamic symbolic abstractions of sampled control systems."""

from ._core import (
    Error,
    InputOutOfRangeError,
    NoPathError,
    ParseError,
    PrecisionBreachError,
    RangeExceededError,
    ZoomQuantizer,
    check,
    integrate,
    lattice_count,
    lattice_points,
    model_names,
    patrol,
    plan,
    precision_ok,
    zoom_indices,
    zoom_quantize,
)

__all__ = [
    "Error",
    "InputOutOfRangeError",
    "NoPathError",
    "ParseError",
    "PrecisionBreachError",
    "RangeExceededError",
    "ZoomQuantizer",
    "check",
    "integrate",
    "lattice_count",
    "lattice_points",
    "model_names",
    "patrol",
    "plan",
    "precision_ok",
    "zoom_indices",
    "zoom_quantize",
]
