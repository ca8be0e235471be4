"""Piecewise-constant test images with values in [0, 1]."""

import numpy as np

from ._validation import InvalidInputError

SUPPORTED_SIZES = (16, 32, 64, 128)
KINDS = ("star", "disk", "blocks")


def _centred_coords(n):
    c = (n - 1) / 2.0
    ys, xs = np.mgrid[:n, :n]
    return (xs - c) / n, (c - ys) / n


def make_phantom(kind, width, height=None, arms=8):
    """Return a ``(height, width)`` phantom.

    ``star`` is a binary star with ``arms`` wedge-shaped arms inside a disk
    of radius 0.45 (in units of the side length); ``disk`` is a unit disk
    with a half-intensity inner disk; ``blocks`` is three unit rectangles on
    a zero background.
    """
    height = width if height is None else height
    if width != height or width not in SUPPORTED_SIZES:
        raise InvalidInputError(
            f"phantoms are square with side in {SUPPORTED_SIZES}, got {width}x{height}"
        )
    n = width
    x, y = _centred_coords(n)
    r = np.hypot(x, y)
    if kind == "star":
        phi = np.arctan2(y, x)
        return ((r <= 0.45) & (np.cos(arms * phi) >= 0)).astype(float)
    if kind == "disk":
        img = (r <= 0.4).astype(float)
        img[np.hypot(x - 0.1, y - 0.05) <= 0.15] = 0.5
        return img
    if kind == "blocks":
        img = np.zeros((n, n))
        q = n // 8
        img[q : 3 * q, q : 4 * q] = 1.0
        img[4 * q : 7 * q, 2 * q : 3 * q] = 1.0
        img[3 * q : 6 * q, 5 * q : 7 * q] = 1.0
        return img
    raise InvalidInputError(f"unknown phantom kind {kind!r}; expected one of {KINDS}")
