"""Input validation helpers shared by every module."""

import math

import numpy as np


class ValidationError(ValueError):
    """Raised when an argument violates a documented invariant."""


def check_finite_scalar(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(value, name):
    value = check_finite_scalar(value, name)
    if value <= 0:
        raise ValidationError(f"{name} must be > 0, got {value!r}")
    return value


def check_non_negative(value, name):
    value = check_finite_scalar(value, name)
    if value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}")
    return value


def check_positive_int(value, name, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value!r}")
    return int(value)


def check_fraction(value, name):
    """Fraction in the half-open interval [0, 1)."""
    value = check_finite_scalar(value, name)
    if not 0.0 <= value < 1.0:
        raise ValidationError(f"{name} must lie in [0, 1), got {value!r}")
    return value


def check_finite_array(arr, name):
    arr = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return arr


def check_shape(arr, shape, name):
    if arr.shape != tuple(shape):
        raise ValidationError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    return arr
