"""Input validation helpers shared by the public functions and the estimator."""

import numbers

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an array argument has the wrong shape, size or content."""


class InvalidParameterError(ValueError):
    """Raised when a scalar parameter is outside its admissible range."""


class DivergenceError(RuntimeError):
    """Raised when an iteration produces non-finite or runaway iterates.

    Attributes
    ----------
    iteration : int
        Outer iteration index at which divergence was detected.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ConvergenceWarning(UserWarning):
    """Emitted when an iterative routine exhausts its iteration budget."""


def check_image(u, name="u"):
    """Return ``u`` as a finite 2-D float array of shape (height, width)."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D (height, width), got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def check_field(w, shape=None, name="w"):
    """Return ``w`` as a float array of shape (2, height, width)."""
    arr = np.asarray(w, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != 2:
        raise InvalidInputError(f"{name} must have shape (2, height, width), got {arr.shape}")
    if shape is not None and arr.shape[1:] != tuple(shape):
        raise InvalidInputError(
            f"{name} grid {arr.shape[1:]} does not match image grid {tuple(shape)}"
        )
    return arr


def check_vector(v, size=None, name="v"):
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if size is not None and arr.size != size:
        raise InvalidInputError(f"{name} has length {arr.size}, expected {size}")
    return arr


def check_scalar(x, name, low=None, high=None, include_low=True, include_high=True):
    """Validate a real scalar against an (optionally open) interval."""
    if not isinstance(x, numbers.Real) or isinstance(x, bool):
        raise InvalidParameterError(f"{name} must be a real number, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise InvalidParameterError(f"{name} must be finite, got {x}")
    if low is not None and (x < low or (x == low and not include_low)):
        bracket = "[" if include_low else "("
        raise InvalidParameterError(f"{name}={x} outside {bracket}{low}, ...")
    if high is not None and (x > high or (x == high and not include_high)):
        bracket = "]" if include_high else ")"
        raise InvalidParameterError(f"{name}={x} outside ..., {high}{bracket}")
    return x


def check_positive_int(n, name):
    if not isinstance(n, numbers.Integral) or isinstance(n, bool) or n < 1:
        raise InvalidParameterError(f"{name} must be a positive integer, got {n!r}")
    return int(n)
