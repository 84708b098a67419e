"""Small input-validation helpers shared across the package."""
from __future__ import annotations

import math
from typing import Iterable


class InputError(ValueError):
    """Invalid user-supplied structure or parameter (CLI exit code 2)."""


def require(condition: bool, message: str) -> None:
    if not condition:
        raise InputError(message)


def check_probability(value: float, name: str = "p") -> float:
    require(0.0 < value < 1.0, f"{name} must lie strictly in (0, 1), got {value!r}")
    return float(value)


def check_finite(values: Iterable[float], name: str) -> None:
    for v in values:
        require(math.isfinite(v), f"{name} must be finite, got {v!r}")


def check_positive_int(value: int, name: str) -> int:
    require(isinstance(value, (int,)) and not isinstance(value, bool) and value >= 1,
            f"{name} must be a positive integer, got {value!r}")
    return int(value)
