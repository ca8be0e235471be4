"""Nested primal-dual iteration with convex extrapolation and Bregman re-anchoring.

One outer step ``i``:

1. inner loop, ``j = 1..J``, with the data gradient frozen at ``u_i``::

       u_hat = P_+[u_i - mu (T^T(T u_i - v) + alpha_i D^T(w - w0))]
       w     = clip(w + nu D u_hat, -1, 1)

2. extrapolation ``u_{i+1} = u_i + lam (u_hat - u_i)`` with ``lam in (1, 2)``;
3. the Bregman anchor moves to ``u_{i+1}`` and ``w0 = sign(D u_{i+1})``.

The dual field is carried from one outer step to the next.
"""

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ._validation import (
    DivergenceError,
    InvalidInputError,
    InvalidParameterError,
    check_field,
    check_image,
    check_positive_int,
    check_scalar,
    check_vector,
)
from .forward_models import operator_norm
from .operators import divergence_adjoint, gradient, tv_subgradient, tv_value
from .proximal import prox_dual_linf, prox_indicator_nonneg
from .regularization import (
    Band,
    IndexFunction,
    MdpConfig,
    alpha_schedule,
    alpha_upper_bound,
    bregman_distance,
    mdp_band_check,
    objective_F,
)

logger = logging.getLogger(__name__)

STOPPING_RULES = ("mdp", "rel_error", "max_iters")
TRACE_COLUMNS = (
    "iter",
    "alpha",
    "discrepancy",
    "rel_error",
    "tv",
    "bregman",
    "fp_residual",
    "objective",
    "ms_elapsed",
)


@dataclass
class SolverConfig:
    """Static parameters of the iteration.

    ``mu=None`` means ``1 / ||T||^2``; ``nu=None`` means
    ``sqrt(delta^2 / psi(delta))`` (``1.0`` when the noise level is zero).
    Step lengths ``mu >= 2 / ||T||^2`` are rejected unless
    ``allow_unstable_step`` is set.
    """

    mu: Optional[float] = None
    relaxation: float = 1.5
    nu: Optional[float] = None
    inner_iters: int = 10
    max_outer: int = 500
    stopping: str = "mdp"
    tau_lo: float = 1.1
    tau_hi: float = 1.5
    epsilon: Optional[float] = None
    psi: IndexFunction = field(default_factory=IndexFunction)
    allow_unstable_step: bool = False
    divergence_factor: float = 10.0
    record_timing: bool = True
    seed: int = 0

    def validate(self, op_norm=None):
        if self.mu is not None:
            check_scalar(self.mu, "mu", low=0.0, include_low=False)
            if op_norm is not None and op_norm > 0 and not self.allow_unstable_step:
                if self.mu >= 2.0 / op_norm**2:
                    raise InvalidParameterError(
                        f"mu={self.mu} violates mu < 2/||T||^2 = {2.0 / op_norm**2}"
                    )
        check_scalar(self.relaxation, "relaxation", low=1.0, high=2.0,
                     include_low=False, include_high=False)
        if self.nu is not None:
            check_scalar(self.nu, "nu", low=0.0, include_low=False)
        check_positive_int(self.inner_iters, "inner_iters")
        check_positive_int(self.max_outer, "max_outer")
        if self.stopping not in STOPPING_RULES:
            raise InvalidParameterError(f"stopping must be one of {STOPPING_RULES}")
        MdpConfig(self.tau_lo, self.tau_hi)
        if self.stopping == "rel_error":
            check_scalar(self.epsilon, "epsilon", low=0.0, include_low=False)
        check_scalar(self.divergence_factor, "divergence_factor", low=1.0, include_low=False)
        return self


@dataclass
class TraceRecord:
    iter: int
    alpha: float
    discrepancy: float
    rel_error: float
    tv: float
    bregman: float
    fp_residual: float
    objective: float
    ms_elapsed: float


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@dataclass
class RunTrace:
    """Per-outer-iteration records plus the termination reason."""

    records: List[TraceRecord] = field(default_factory=list)
    termination: Optional[str] = None

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def to_csv(self, path=None):
        """Serialise to CSV; the termination reason goes on a trailing comment line.

        Floats are written with ``repr`` so a reparse is exact.  Returns the
        text when ``path`` is None.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.records:
            writer.writerow([_fmt(getattr(r, c)) for c in TRACE_COLUMNS])
        buf.write(f"# termination: {self.termination}\n")
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path_or_text):
        if "\n" in str(path_or_text):
            text = str(path_or_text)
        else:
            with open(path_or_text) as fh:
                text = fh.read()
        lines = text.splitlines()
        termination = None
        data = []
        for line in lines:
            if line.startswith("#"):
                if ":" in line:
                    termination = line.split(":", 1)[1].strip()
                continue
            if line.strip():
                data.append(line)
        reader = csv.reader(data)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise InvalidInputError(f"unexpected trace header {header}")
        records = []
        for row in reader:
            vals = [int(row[0])] + [float(x) for x in row[1:]]
            records.append(TraceRecord(*vals))
        return cls(records, termination)


@dataclass
class SolverState:
    u: np.ndarray        # current outer iterate u_i
    w: np.ndarray        # dual field carried between outer steps
    w0: np.ndarray       # sign(D u_anchor)
    u_anchor: np.ndarray
    i: int = 1


@dataclass
class SolveResult:
    u: np.ndarray
    trace: RunTrace
    termination: str
    u_hat: np.ndarray
    w: np.ndarray
    mu: float
    nu: float
    op_norm: float
    monitor_violations: int = 0


def inner_dual_loop(u_i, w_init, w0, op, v_delta, alpha, mu, nu, n_inner, data_grad=None):
    """Run ``n_inner`` alternating primal (nonnegativity prox) / dual (clamp) steps.

    The data gradient ``T^T(T u_i - v)`` is evaluated once at ``u_i`` and can
    be supplied precomputed.  Returns the last primal iterate and the dual
    field after the final dual step.

    Raises
    ------
    DivergenceError
        If a non-finite value appears.
    """
    u_i = check_image(u_i, "u_i")
    w = check_field(w_init, u_i.shape, "w_init")
    w0 = check_field(w0, u_i.shape, "w0")
    n_inner = check_positive_int(n_inner, "n_inner")
    if data_grad is None:
        r = op.apply(u_i) - check_vector(v_delta, op.out_dim, "v_delta")
        data_grad = op.apply_adjoint(r).reshape(u_i.shape)
    for j in range(n_inner):
        u_hat = prox_indicator_nonneg(u_i - mu * (data_grad + alpha * divergence_adjoint(w - w0)))
        if not np.all(np.isfinite(u_hat)):
            raise DivergenceError(f"non-finite primal iterate at inner step {j + 1}")
        w = prox_dual_linf(w + nu * gradient(u_hat), nu)
    return u_hat, w


def outer_iteration(state, op, v_delta, alpha, mu, relaxation, nu, n_inner, data_grad=None):
    """One outer step: inner loop, convex extrapolation, re-anchoring.

    Returns ``(new_state, u_hat)``.
    """
    u_hat, w = inner_dual_loop(state.u, state.w, state.w0, op, v_delta, alpha, mu, nu,
                               n_inner, data_grad)
    u_next = state.u + relaxation * (u_hat - state.u)
    if not np.all(np.isfinite(u_next)):
        raise DivergenceError(f"non-finite iterate at outer step {state.i}", state.i)
    new_state = SolverState(u=u_next, w=w, w0=tv_subgradient(u_next), u_anchor=u_next,
                            i=state.i + 1)
    return new_state, u_hat


def fixed_point_residual(u, w, op, v_delta, alpha, mu, nu, w0):
    """Distance of ``(u, w)`` from one sweep of the coupled prox characterisation.

    ``||u - P_+[u - mu((1/alpha) T^T(Tu - v) + D^T(w - w0))]||
    + ||w - clip(w + nu D u)||``; zero exactly at a solution.  With
    ``mu = alpha * mu_alg`` the primal part is the solver's own step.
    """
    u = check_image(u, "u")
    w = check_field(w, u.shape, "w")
    alpha = check_scalar(alpha, "alpha", low=0.0, include_low=False)
    r = op.apply(u) - check_vector(v_delta, op.out_dim, "v_delta")
    g = op.apply_adjoint(r).reshape(u.shape) / alpha + divergence_adjoint(w - w0)
    primal = u - prox_indicator_nonneg(u - mu * g)
    dual = w - prox_dual_linf(w + nu * gradient(u), nu)
    return float(np.linalg.norm(primal) + np.linalg.norm(dual))


def initial_guess(op, v_delta, shape):
    """Best constant fit ``c * 1`` to the data, i.e. the backprojection mean
    ``mean(T^T v)`` normalised by ``mean(T^T T 1)``, clipped at zero."""
    ones = np.ones(op.in_dim)
    denom = float(np.sum(op.apply(ones) ** 2))
    c = float(op.apply_adjoint(v_delta).sum()) / denom if denom > 0 else 0.0
    return np.full(shape, max(c, 0.0))


def _monitor(alpha_i, alpha_cont, lam):
    """Parameter conditions for convergence of the iteration; True when all hold."""
    diff = alpha_i - alpha_cont
    f1 = 1.0 + lam**2 * diff
    f2 = lam * diff - (1.0 - lam)
    relax = 1.0 / lam < 1.0 - diff
    return (0.0 < f1 < 1.0) and f2 < 0.0 and relax


def solve(op, v_delta, shape, cfg=None, delta=0.0, u_dagger=None, u_init=None,
          op_norm=None, on_divergence="return"):
    """Run the nested primal-dual iteration until the stopping rule fires.

    Parameters
    ----------
    op : LinearOperator
    v_delta : array_like
        Noisy data, flattened to ``op.out_dim``.
    shape : tuple of int
        Image shape ``(height, width)``.
    cfg : SolverConfig, optional
    delta : float
        Absolute noise level ``||v_delta - v_clean||``; required by the
        discrepancy-principle stop and the default dual step.
    u_dagger : array_like, optional
        Ground truth; enables the error columns of the trace.
    u_init : array_like, optional
        Starting image; defaults to :func:`initial_guess`.
    op_norm : float, optional
        ``||T||`` if already known.
    on_divergence : {"return", "raise"}

    Returns
    -------
    SolveResult
        ``u`` is the final iterate projected onto the nonnegative orthant.
        ``termination`` is one of ``mdp_hit``, ``rel_error_hit``,
        ``max_iters`` or ``diverged``.
    """
    cfg = SolverConfig() if cfg is None else cfg
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != op.in_dim:
        raise InvalidInputError(f"shape {shape} does not match operator input size {op.in_dim}")
    v_delta = check_vector(v_delta, op.out_dim, "v_delta")
    delta = check_scalar(delta, "delta", low=0.0)
    if op_norm is None:
        op_norm = operator_norm(op, seed=cfg.seed)
    cfg.validate(op_norm)
    if cfg.stopping == "mdp" and delta == 0.0:
        raise InvalidParameterError("discrepancy-principle stopping needs delta > 0")
    if u_dagger is not None:
        u_dagger = check_image(u_dagger, "u_dagger").reshape(shape)
    elif cfg.stopping == "rel_error":
        raise InvalidParameterError("rel_error stopping needs u_dagger")

    mu = cfg.mu if cfg.mu is not None else 1.0 / op_norm**2
    alpha_cont = alpha_upper_bound(delta, cfg.psi) if delta > 0 else None
    nu = cfg.nu if cfg.nu is not None else (math.sqrt(alpha_cont) if alpha_cont else 1.0)
    mdp = MdpConfig(cfg.tau_lo, cfg.tau_hi, delta)

    u0 = initial_guess(op, v_delta, shape) if u_init is None else check_image(u_init).reshape(shape)
    w0 = tv_subgradient(u0)
    state = SolverState(u=u0.copy(), w=w0.copy(), w0=w0, u_anchor=u0.copy())

    if u_dagger is not None:
        norm_dagger = float(np.linalg.norm(u_dagger)) or 1.0
        q_dagger = tv_subgradient(u_dagger)
        init_err = float(np.linalg.norm(u0 - u_dagger)) / norm_dagger
    trace = RunTrace()
    violations = 0
    u_hat = u0.copy()
    termination = "max_iters"

    residual = op.apply(state.u) - v_delta
    t_start = time.perf_counter()
    for i in range(1, cfg.max_outer + 1):
        alpha = alpha_schedule(i)
        if alpha_cont is not None and not _monitor(alpha, alpha_cont, cfg.relaxation):
            violations += 1
            logger.debug("parameter conditions violated at outer step %d", i)
        prev = state
        data_grad = op.apply_adjoint(residual).reshape(shape)
        try:
            state, u_hat = outer_iteration(prev, op, v_delta, alpha, mu, cfg.relaxation, nu,
                                           cfg.inner_iters, data_grad)
        except DivergenceError as exc:
            exc.iteration = i
            termination = "diverged"
            if on_divergence == "raise":
                raise
            break

        residual = op.apply(state.u) - v_delta
        disc = float(np.linalg.norm(residual))
        if u_dagger is not None:
            rel = float(np.linalg.norm(state.u - u_dagger)) / norm_dagger
            breg = bregman_distance(state.u, u_dagger, q_dagger)
        else:
            rel = breg = math.nan
        fp = fixed_point_residual(state.u, state.w, op, v_delta, alpha, alpha * mu, nu, prev.w0)
        obj = objective_F(u_hat, v_delta, op, alpha, prev.u_anchor, prev.w0)
        ms = (time.perf_counter() - t_start) * 1e3 if cfg.record_timing else math.nan
        trace.records.append(
            TraceRecord(i, alpha, disc, rel, tv_value(state.u), breg, fp, obj, ms)
        )

        if not np.isfinite(disc):
            termination = "diverged"
        elif u_dagger is not None and rel > cfg.divergence_factor * max(init_err, 1e-12):
            termination = "diverged"
        elif cfg.stopping == "mdp" and mdp_band_check(disc, mdp) is not Band.ABOVE:
            termination = "mdp_hit"
        elif cfg.stopping == "rel_error" and rel <= cfg.epsilon:
            termination = "rel_error_hit"
        else:
            continue
        break

    trace.termination = termination
    if termination == "diverged" and on_divergence == "raise":
        raise DivergenceError(f"iteration diverged at outer step {len(trace)}", len(trace))
    u_final = prox_indicator_nonneg(state.u) if np.all(np.isfinite(state.u)) else state.u
    logger.info("stopped after %d outer steps: %s", len(trace), termination)
    return SolveResult(u=u_final, trace=trace, termination=termination, u_hat=u_hat,
                       w=state.w, mu=mu, nu=nu, op_norm=op_norm, monitor_violations=violations)
