"""Discrete gradient / divergence pair and the anisotropic TV functional.

Images are 2-D arrays indexed ``u[y, x]`` with shape ``(height, width)``.
Gradient fields are arrays of shape ``(2, height, width)``: channel 0 holds
the x-differences (along columns), channel 1 the y-differences (along rows).
Forward differences with a replicate (Neumann) boundary, so the last column
of ``dx`` and the last row of ``dy`` are zero.
"""

import numpy as np

from ._validation import InvalidInputError, check_field, check_image


def gradient(u):
    """Forward-difference gradient ``D u``.

    Parameters
    ----------
    u : array_like, shape (height, width)

    Returns
    -------
    ndarray, shape (2, height, width)
    """
    u = check_image(u)
    g = np.zeros((2,) + u.shape)
    g[0, :, :-1] = u[:, 1:] - u[:, :-1]
    g[1, :-1, :] = u[1:, :] - u[:-1, :]
    return g


def divergence_adjoint(w):
    """Exact transpose ``D^T w`` of :func:`gradient` (a negative divergence)."""
    w = check_field(w)
    px, py = w[0], w[1]
    out = np.zeros(w.shape[1:])
    out[:, :-1] -= px[:, :-1]
    out[:, 1:] += px[:, :-1]
    out[:-1, :] -= py[:-1, :]
    out[1:, :] += py[:-1, :]
    return out


def tv_value(u):
    """Anisotropic total variation ``||D u||_1``."""
    return float(np.abs(gradient(u)).sum())


def tv_subgradient(u):
    """Sign of the gradient field, an element of the subdifferential of ``||.||_1`` at ``D u``.

    Zero differences select 0, so a constant image maps to the zero field.
    """
    return np.sign(gradient(u))


def mean_value(u):
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        raise InvalidInputError("mean value of an empty image is undefined")
    return float(u.mean())


def decompose(u):
    """Split ``u`` into its zero-mean part and its mean: ``u = u_tilde + m * 1``."""
    u = check_image(u)
    m = mean_value(u)
    return u - m, m


def bv_norm(u):
    """``||u||_1 + TV(u)``."""
    u = check_image(u)
    return float(np.abs(u).sum()) + tv_value(u)
