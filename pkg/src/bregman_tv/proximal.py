"""Proximal maps of the two indicator functions used by the solver.

Both are projections, so they are idempotent and nonexpansive.  The step
size drops out of the prox of an indicator; the nonnegativity projection
therefore takes no step argument at all.
"""

from typing import NamedTuple

import numpy as np

from ._validation import check_scalar


def prox_indicator_nonneg(v):
    """Projection onto the nonnegative orthant, ``max(v, 0)``."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def prox_dual_linf(w, nu):
    """Prox of ``nu * g*`` with ``g = ||.||_1``: clamp every entry to ``[-1, 1]``.

    ``g*`` is the indicator of the unit l-infinity ball, hence ``nu`` does not
    change the result; it is validated so callers cannot pass a meaningless
    step.
    """
    check_scalar(nu, "nu", low=0.0, include_low=False)
    return np.clip(np.asarray(w, dtype=float), -1.0, 1.0)


def indicator_nonneg(x):
    """0 if every entry of ``x`` is >= 0, else ``inf``."""
    return 0.0 if np.all(np.asarray(x) >= 0) else np.inf


def indicator_linf_ball(x, radius=1.0):
    return 0.0 if np.all(np.abs(np.asarray(x)) <= radius) else np.inf


class InequalityCheck(NamedTuple):
    holds: bool
    slack: float
    x_plus: np.ndarray


def prox_update_inequality_check(x_minus, delta, y, prox, g_value, atol=1e-10):
    """Check the prox-update inequality for ``x+ = prox(x- + delta)``.

    For every ``y``::

        ||x+ - y||^2 <= ||x- - y||^2 - ||x+ - x-||^2 + 2<x+ - y, delta>
                        + 2 g(y) - 2 g(x+)

    Parameters
    ----------
    x_minus, delta, y : array_like
        Arrays of a common shape.
    prox : callable
        The prox of ``g``; applied to ``x_minus + delta``.
    g_value : callable
        Evaluates ``g``; may return ``inf`` outside its domain.
    atol : float
        Slack above ``-atol`` counts as holding.

    Returns
    -------
    InequalityCheck
        ``slack`` is right-hand side minus left-hand side.  When ``g(y)`` is
        infinite the inequality holds trivially and ``slack`` is ``inf``.
    """
    x_minus = np.asarray(x_minus, dtype=float)
    delta = np.asarray(delta, dtype=float)
    y = np.asarray(y, dtype=float)
    x_plus = prox(x_minus + delta)

    gy = g_value(y)
    if np.isinf(gy):
        return InequalityCheck(True, np.inf, x_plus)
    gx = g_value(x_plus)

    lhs = np.sum((x_plus - y) ** 2)
    rhs = (
        np.sum((x_minus - y) ** 2)
        - np.sum((x_plus - x_minus) ** 2)
        + 2.0 * np.sum((x_plus - y) * delta)
        + 2.0 * gy
        - 2.0 * gx
    )
    slack = float(rhs - lhs)
    return InequalityCheck(bool(slack >= -atol), slack, x_plus)
