"""Index functions, Bregman distance, the Tikhonov-Bregman objective and
parameter-choice diagnostics (discrepancy band, bounds on alpha)."""

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import (
    InvalidInputError,
    InvalidParameterError,
    check_field,
    check_image,
    check_scalar,
)
from .operators import divergence_adjoint, gradient, tv_subgradient, tv_value


@dataclass(frozen=True)
class IndexFunction:
    """Power-type index function ``psi(t) = c * t**p`` with ``0 < p <= 1``.

    Concave, strictly increasing, ``psi(0) = 0``.
    """

    c: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        check_scalar(self.c, "c", low=0.0, include_low=False)
        check_scalar(self.p, "p", low=0.0, high=1.0, include_low=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidInputError("index function is defined on [0, inf)")
        out = self.c * np.power(t, self.p)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MdpConfig:
    """Discrepancy band ``[tau_lo * delta, tau_hi * delta]``."""

    tau_lo: float = 1.1
    tau_hi: float = 1.5
    delta_abs: float = 0.0

    def __post_init__(self):
        check_scalar(self.tau_lo, "tau_lo", low=1.0, include_low=False)
        check_scalar(self.tau_hi, "tau_hi", low=self.tau_lo)
        check_scalar(self.delta_abs, "delta_abs", low=0.0)

    @property
    def band(self):
        return self.tau_lo * self.delta_abs, self.tau_hi * self.delta_abs


class Band(str, enum.Enum):
    BELOW = "below"
    INSIDE = "inside"
    ABOVE = "above"


class BoundCheck(NamedTuple):
    holds: bool
    slack: float


def bregman_distance(u, u_ref, q_ref, atol=1e-12):
    """``J(u) - J(u_ref) - <D^T q_ref, u - u_ref>`` for ``J = ||D .||_1``.

    ``q_ref`` is the dual field (shape ``(2, h, w)``) whose image under
    ``D^T`` is the subgradient.  It must lie in ``[-1, 1]`` and agree with
    ``sign(D u_ref)`` wherever that difference is nonzero.
    """
    u = check_image(u, "u")
    u_ref = check_image(u_ref, "u_ref")
    if u.shape != u_ref.shape:
        raise InvalidInputError(f"shape mismatch {u.shape} vs {u_ref.shape}")
    q_ref = check_field(q_ref, u.shape, "q_ref")
    if np.any(np.abs(q_ref) > 1.0 + atol):
        raise InvalidInputError("q_ref has entries outside [-1, 1]")
    g_ref = gradient(u_ref)
    nz = g_ref != 0
    if np.any(np.abs(q_ref[nz] - np.sign(g_ref[nz])) > atol):
        raise InvalidInputError("q_ref is not a subgradient of ||D u_ref||_1")
    inner = np.sum(divergence_adjoint(q_ref) * (u - u_ref))
    return tv_value(u) - tv_value(u_ref) - float(inner)


def objective_F(u, v_delta, op, alpha, u0, w0=None):
    """``0.5 ||T u - v||^2 + alpha * D_J(u, u0) + h(u)``; ``inf`` if ``u`` has a negative entry.

    ``w0`` defaults to :func:`tv_subgradient` of ``u0``.
    """
    alpha = check_scalar(alpha, "alpha", low=0.0, include_low=False)
    u = check_image(u, "u")
    if np.any(u < 0):
        return np.inf
    if w0 is None:
        w0 = tv_subgradient(u0)
    r = op.apply(u) - np.asarray(v_delta, dtype=float).ravel()
    return 0.5 * float(r @ r) + alpha * bregman_distance(u, u0, w0)


def mdp_band_check(discrepancy, cfg):
    """Classify a residual norm against the discrepancy band (boundaries count as inside)."""
    lo, hi = cfg.band
    if discrepancy < lo:
        return Band.BELOW
    if discrepancy > hi:
        return Band.ABOVE
    return Band.INSIDE


def alpha_schedule(i):
    """``alpha_i = 1 / i``."""
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool) or i < 1:
        raise InvalidInputError(f"iteration index must be an integer >= 1, got {i!r}")
    return 1.0 / i


def alpha_lower_bound_check(alpha, delta_abs, psi, tau_lo):
    """Diagnostic for ``(tau_lo - 1) * delta**2 / (2 alpha) <= psi(delta)``.

    Equivalent to ``delta**2 / (2 alpha) <= psi(delta) / (tau_lo - 1)``.
    ``slack`` is ``psi(delta) - (tau_lo - 1) * delta**2 / (2 alpha)``.
    """
    alpha = check_scalar(alpha, "alpha", low=0.0, include_low=False)
    delta_abs = check_scalar(delta_abs, "delta_abs", low=0.0)
    tau_lo = check_scalar(tau_lo, "tau_lo", low=1.0, include_low=False)
    slack = psi(delta_abs) - (tau_lo - 1.0) * delta_abs**2 / (2.0 * alpha)
    return BoundCheck(bool(slack >= 0.0), float(slack))


def alpha_upper_bound(delta_abs, psi):
    """``Phi(delta) = delta**2 / psi(delta)``."""
    delta_abs = check_scalar(delta_abs, "delta_abs", low=0.0)
    if delta_abs == 0.0:
        raise InvalidInputError("alpha upper bound is undefined at delta = 0")
    return delta_abs**2 / psi(delta_abs)


def vsc_residual(u, u_dagger, op, psi, sigma=1.0, form="norm"):
    """Right- minus left-hand side of the variational source condition at ``u``.

    ``form="norm"`` uses ``sigma * ||u - u_dagger||`` on the left,
    ``form="bregman"`` uses ``sigma * D_J(u, u_dagger)`` with the sign
    subgradient of ``u_dagger``.  Nonnegative means the condition holds at
    this ``u``.
    """
    sigma = check_scalar(sigma, "sigma", low=0.0, high=1.0, include_low=False)
    u = check_image(u, "u")
    u_dagger = check_image(u_dagger, "u_dagger")
    misfit = np.linalg.norm(op.apply(u) - op.apply(u_dagger))
    rhs = tv_value(u) - tv_value(u_dagger) + psi(misfit)
    if form == "norm":
        lhs = sigma * np.linalg.norm(u - u_dagger)
    elif form == "bregman":
        lhs = sigma * bregman_distance(u, u_dagger, tv_subgradient(u_dagger))
    else:
        raise InvalidParameterError(f"unknown form {form!r}")
    return float(rhs - lhs)


def mdp_consequences(misfit_to_truth, delta_abs, tau_lo, tau_hi):
    """Check ``(tau_lo - 1) delta <= ||T u - T u_dagger|| <= (tau_hi + 1) delta``.

    Returns the slacks of the lower and upper inequality (nonnegative means
    the inequality holds).
    """
    lower = misfit_to_truth - (tau_lo - 1.0) * delta_abs
    upper = (tau_hi + 1.0) * delta_abs - misfit_to_truth
    return float(lower), float(upper)


def total_error_constant(tau_lo, tau_hi):
    """``1/(tau_lo - 1) + (tau_hi + 2)(tau_hi + 1)/(tau_lo - 1)``."""
    return 1.0 / (tau_lo - 1.0) + (tau_hi + 2.0) * (tau_hi + 1.0) / (tau_lo - 1.0)


def total_error_bound(delta_abs, psi, tau_lo, tau_hi):
    """``(1/(tau_lo - 1) + tau_hi + 1) * psi(delta)``, the rate bound for the error."""
    return (1.0 / (tau_lo - 1.0) + tau_hi + 1.0) * psi(delta_abs)


def bregman_error_bound(delta_abs, psi, tau_lo, tau_hi, sigma=1.0):
    """``(1/(tau_lo - 1) + (2/sigma - 1)/(tau_lo - 1) + tau_hi + 1) * psi(delta)``."""
    k = 1.0 / (tau_lo - 1.0)
    return (k + (2.0 / sigma - 1.0) * k + tau_hi + 1.0) * psi(delta_abs)


def strict_convexity_gap(u1, u2, rho):
    """Difference of both sides of
    ``||rho u1 + (1-rho) u2||^2 = rho||u1||^2 + (1-rho)||u2||^2 - rho(1-rho)||u1-u2||^2``.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    lhs = np.sum((rho * u1 + (1 - rho) * u2) ** 2)
    rhs = rho * np.sum(u1**2) + (1 - rho) * np.sum(u2**2) - rho * (1 - rho) * np.sum((u1 - u2) ** 2)
    return float(lhs - rhs)


def concavity_gap(psi, K, t):
    """``K psi(t) - psi(K t)``; nonnegative for concave ``psi`` with ``psi(0)=0`` and ``K >= 1``."""
    return float(K * psi(t) - psi(K * t))
