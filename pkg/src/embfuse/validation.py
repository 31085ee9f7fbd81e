"""Input validation helpers used by the containers and estimators."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def check_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")


def as_float_matrix(data, name: str = "data") -> np.ndarray:
    """Coerce to a read-only, C-contiguous float32 matrix with finite entries."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must be at least 1x1, got shape {arr.shape}")
    check_finite(arr, name)
    return freeze(np.ascontiguousarray(arr))


def as_float_vector(data, name: str = "values") -> np.ndarray:
    """Coerce to a read-only float32 vector with finite entries."""
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] < 1:
        raise ValidationError(f"{name} must be non-empty")
    check_finite(arr, name)
    return freeze(np.ascontiguousarray(arr))


def check_timing(frame_rate_hz: float, t_start_s: float) -> None:
    rate = float(frame_rate_hz)
    start = float(t_start_s)
    if not np.isfinite(rate) or rate <= 0.0:
        raise ValidationError(f"frame_rate_hz must be positive and finite, got {frame_rate_hz}")
    if not np.isfinite(start) or start < 0.0:
        raise ValidationError(f"t_start_s must be non-negative and finite, got {t_start_s}")


def check_positive_int(value, name: str) -> int:
    iv = int(value)
    if iv != value or iv < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return iv
