"""scikit-learn style wrapper around :func:`bregman_tv.solver.solve`."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import InvalidInputError
from .forward_models import LinearOperator, operator_norm
from .regularization import IndexFunction
from .solver import SolverConfig, solve


class BregmanTVReconstructor(TransformerMixin, BaseEstimator):
    """Reconstruct images from measurement rows with the Bregman-TV iteration.

    Each row of ``X`` is one measurement vector of length ``operator.out_dim``;
    ``transform`` returns one flattened nonnegative image per row.

    Parameters
    ----------
    operator : LinearOperator
        Forward map ``T``.
    shape : tuple of int
        Image shape ``(height, width)``.
    delta : float
        Absolute noise level, shared by all rows; needed for ``stopping="mdp"``.
    stopping : {"max_iters", "mdp"}
    mu, relaxation, nu, inner_iters, max_outer, tau_lo, tau_hi
        Forwarded to :class:`~bregman_tv.solver.SolverConfig`.
    psi_c, psi_p : float
        Index function ``psi(t) = psi_c * t ** psi_p``.
    seed : int
        Seed of the power iteration for ``||T||``.

    Attributes
    ----------
    operator_norm_ : float
    reconstructions_ : ndarray of shape (n_samples, n_pixels)
        Reconstructions of the rows passed to ``fit``.
    traces_ : list of RunTrace
    termination_reasons_ : list of str
    n_iter_ : ndarray of int
    """

    def __init__(self, operator=None, shape=None, delta=0.0, stopping="max_iters", mu=None,
                 relaxation=1.5, nu=None, inner_iters=10, max_outer=500, tau_lo=1.1,
                 tau_hi=1.5, psi_c=1.0, psi_p=0.5, seed=0):
        self.operator = operator
        self.shape = shape
        self.delta = delta
        self.stopping = stopping
        self.mu = mu
        self.relaxation = relaxation
        self.nu = nu
        self.inner_iters = inner_iters
        self.max_outer = max_outer
        self.tau_lo = tau_lo
        self.tau_hi = tau_hi
        self.psi_c = psi_c
        self.psi_p = psi_p
        self.seed = seed

    def _config(self):
        return SolverConfig(mu=self.mu, relaxation=self.relaxation, nu=self.nu,
                            inner_iters=self.inner_iters, max_outer=self.max_outer,
                            stopping=self.stopping, tau_lo=self.tau_lo, tau_hi=self.tau_hi,
                            psi=IndexFunction(self.psi_c, self.psi_p), record_timing=False,
                            seed=self.seed)

    def _check_X(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.operator.out_dim:
            raise InvalidInputError(
                f"X has {X.shape[1]} features, operator expects {self.operator.out_dim}"
            )
        return X

    def _validate_setup(self):
        if not isinstance(self.operator, LinearOperator):
            raise InvalidInputError("operator must be a LinearOperator")
        if self.shape is None or int(np.prod(self.shape)) != self.operator.in_dim:
            raise InvalidInputError(f"shape {self.shape} does not match operator input size")

    def _solve_rows(self, X, u_dagger=None):
        cfg = self._config()
        truths = [None] * len(X)
        if u_dagger is not None:
            truths = np.asarray(u_dagger, dtype=float).reshape(len(X), *self.shape)
        return [solve(self.operator, x, self.shape, cfg, delta=self.delta, u_dagger=t,
                      op_norm=self.operator_norm_) for x, t in zip(X, truths)]

    def fit(self, X, y=None, u_dagger=None):
        """Estimate ``||T||`` and reconstruct the rows of ``X``.

        ``u_dagger`` (one ground-truth image per row) enables error columns
        in the traces.
        """
        self._validate_setup()
        X = self._check_X(X)
        self._config().validate()
        self.operator_norm_ = operator_norm(self.operator, seed=self.seed)
        results = self._solve_rows(X, u_dagger)
        self.reconstructions_ = np.stack([r.u.ravel() for r in results])
        self.traces_ = [r.trace for r in results]
        self.termination_reasons_ = [r.termination for r in results]
        self.n_iter_ = np.array([len(r.trace) for r in results])
        return self

    def transform(self, X):
        """Reconstruct each row of ``X``; returns ``(n_samples, n_pixels)``."""
        check_is_fitted(self, "operator_norm_")
        X = self._check_X(X)
        return np.stack([r.u.ravel() for r in self._solve_rows(X)])

    def fit_transform(self, X, y=None, u_dagger=None):
        return self.fit(X, y, u_dagger=u_dagger).reconstructions_
