import math
from typing import Any, Optional, Sequence, Tuple

from dbt_common.exceptions import DbtValidationError


def float_setting(value: Optional[Any] = None) -> Optional[float]:
    if value is None:
        return None
    elif isinstance(value, bool):
        raise TypeError(f"Invalid type for float evaluation, received: {type(value)}")
    elif any(isinstance(value, i) for i in [int, float, str]):
        return float(value)
    else:
        raise TypeError(
            f"Invalid type for float evaluation, "
            f"expecting `int`, `float`, or `str`, received: {type(value)}"
        )


def point_setting(value: Optional[Any] = None) -> Optional[Tuple[float, float, float]]:
    """Parse a point given as "x,y,z" text or a 3-sequence of numbers."""
    if value is None:
        return None
    if isinstance(value, str):
        parts: Sequence[Any] = [p for p in value.replace(";", ",").split(",") if p.strip()]
    else:
        parts = list(value)
    if len(parts) != 3:
        raise ValueError(f"Invalid point, expecting three coordinates, received: {value!r}")
    x, y, z = (float(p) for p in parts)
    return (x, y, z)


def require_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise DbtValidationError(f"{name} must be finite, received: {value}")
    return value


def require_positive(name: str, value: float) -> float:
    require_finite(name, value)
    if value <= 0:
        raise DbtValidationError(f"{name} must be positive, received: {value}")
    return value


def format_number(value: Optional[float]) -> str:
    """Stable text form for CSV cells; identical floats always render identically."""
    if value is None:
        return ""
    return f"{value:.12g}"


MAX_SEED = 2**64 - 1


def require_seed(value: int) -> int:
    if not 0 <= value <= MAX_SEED:
        raise DbtValidationError(f"seed must lie in [0, 2**64 - 1], received: {value}")
    return value
