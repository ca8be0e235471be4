"""Linear forward operators, spectral-norm estimation and noise injection."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ._validation import (
    ConvergenceWarning,
    InvalidInputError,
    check_positive_int,
    check_scalar,
    check_vector,
)


class LinearOperator:
    """A linear map ``R^in_dim -> R^out_dim`` with its transpose.

    Subclasses implement ``_apply`` and ``_apply_adjoint`` on flat vectors.
    Inputs of any shape with the right number of entries are accepted and
    flattened.
    """

    def __init__(self, in_dim, out_dim):
        self.in_dim = check_positive_int(in_dim, "in_dim")
        self.out_dim = check_positive_int(out_dim, "out_dim")

    @property
    def shape(self):
        return (self.out_dim, self.in_dim)

    def apply(self, u):
        return self._apply(check_vector(u, self.in_dim, "u"))

    def apply_adjoint(self, v):
        return self._apply_adjoint(check_vector(v, self.out_dim, "v"))

    def __matmul__(self, u):
        return self.apply(u)

    @property
    def T(self):
        return _Transposed(self)

    def __repr__(self):
        return f"{type(self).__name__}(out_dim={self.out_dim}, in_dim={self.in_dim})"


class _Transposed(LinearOperator):
    def __init__(self, op):
        super().__init__(op.out_dim, op.in_dim)
        self._op = op

    def _apply(self, u):
        return self._op._apply_adjoint(u)

    def _apply_adjoint(self, v):
        return self._op._apply(v)


class DenseOperator(LinearOperator):
    """Operator given by an explicit ``M x N`` matrix."""

    def __init__(self, matrix):
        A = np.array(matrix, dtype=float)
        if A.ndim != 2 or A.size == 0:
            raise InvalidInputError(f"matrix must be a non-empty 2-D array, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidInputError("matrix has non-finite entries")
        super().__init__(A.shape[1], A.shape[0])
        self.matrix = A

    def _apply(self, u):
        return self.matrix @ u

    def _apply_adjoint(self, v):
        return self.matrix.T @ v


def dense_operator(matrix):
    return DenseOperator(matrix)


class RadonOperator(LinearOperator):
    """Pixel-driven parallel-beam Radon transform.

    Each pixel centre is projected onto the detector line for every angle in
    ``[0, pi)`` (uniformly spaced, ``n_angles`` of them) and its value is
    split between the two nearest detector bins by linear interpolation.
    The operator is stored as a sparse matrix, so the adjoint is the exact
    transpose.  Output vectors are sinograms flattened row-major as
    ``(n_angles, n_detectors)``.

    Parameters
    ----------
    width, height : int
        Image grid size; pixels have unit side length.
    n_angles, n_detectors : int
    detector_spacing : float, default=1.0
    """

    def __init__(self, width, height, n_angles, n_detectors, detector_spacing=1.0):
        width = check_positive_int(width, "width")
        height = check_positive_int(height, "height")
        if not isinstance(n_angles, (int, np.integer)) or n_angles < 1:
            raise InvalidInputError(f"n_angles must be a positive integer, got {n_angles!r}")
        n_detectors = check_positive_int(n_detectors, "n_detectors")
        spacing = check_scalar(detector_spacing, "detector_spacing", low=0.0, include_low=False)
        super().__init__(width * height, int(n_angles) * n_detectors)
        self.width, self.height = width, height
        self.n_angles, self.n_detectors = int(n_angles), n_detectors
        self.detector_spacing = spacing
        self.angles = np.arange(self.n_angles) * (np.pi / self.n_angles)
        self.matrix = self._build()

    def _build(self):
        ys, xs = np.mgrid[: self.height, : self.width]
        # pixel centres relative to the grid centre, y pointing up
        x = (xs - (self.width - 1) / 2.0).ravel()
        y = ((self.height - 1) / 2.0 - ys).ravel()
        pix = np.arange(self.in_dim)
        centre = (self.n_detectors - 1) / 2.0

        rows, cols, vals = [], [], []
        for k, theta in enumerate(self.angles):
            t = (x * np.cos(theta) + y * np.sin(theta)) / self.detector_spacing + centre
            lo = np.floor(t).astype(np.int64)
            frac = t - lo
            for bin_, weight in ((lo, 1.0 - frac), (lo + 1, frac)):
                keep = (bin_ >= 0) & (bin_ < self.n_detectors) & (weight > 0)
                rows.append(k * self.n_detectors + bin_[keep])
                cols.append(pix[keep])
                vals.append(weight[keep])
        A = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=self.shape,
        )
        return A.tocsr()

    def _apply(self, u):
        return self.matrix @ u

    def _apply_adjoint(self, v):
        return self.matrix.T @ v


def radon_operator(width, height, n_angles, n_detectors, detector_spacing=1.0):
    return RadonOperator(width, height, n_angles, n_detectors, detector_spacing)


def operator_norm(op, tol=1e-8, max_iter=5000, seed=0, return_info=False):
    """Estimate ``||T||`` by power iteration on ``T^T T``.

    The returned value is ``sqrt(||T^T T x||)`` for the final unit iterate
    ``x``, which never undercuts the square root of the Rayleigh quotient.
    Convergence needs the relative change to drop below ``tol`` and, using
    the observed contraction ratio, the extrapolated remaining change too.

    Returns
    -------
    float, or (float, bool, int) when ``return_info`` is set
        The estimate, whether the relative change fell below ``tol``, and
        the number of iterations used.
    """
    tol = check_scalar(tol, "tol", low=0.0, include_low=False)
    max_iter = check_positive_int(max_iter, "max_iter")
    x = np.random.default_rng(seed).standard_normal(op.in_dim)
    x /= np.linalg.norm(x)
    est = 0.0
    change_prev = np.inf
    converged = False
    for it in range(1, max_iter + 1):
        y = op.apply_adjoint(op.apply(x))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            est, converged = 0.0, True
            break
        new = np.sqrt(ny)
        change = abs(new - est)
        # geometric tail estimate: slow contraction leaves more than one step's change
        q = change / change_prev if change_prev > 0 else 0.0
        tail = change * q / (1.0 - q) if q < 1.0 else np.inf
        if change <= tol * new and tail <= tol * new:
            est, converged = new, True
            break
        est, change_prev = new, change
        x = y / ny
    if not converged:
        warnings.warn(
            f"power iteration did not reach tol={tol} in {max_iter} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    if return_info:
        return float(est), converged, it
    return float(est)


@dataclass(frozen=True)
class NoisyMeasurement:
    v_delta: np.ndarray
    v_clean: np.ndarray
    delta_abs: float
    delta_rel: float


def add_noise(v_clean, delta_rel, seed=0):
    """Add Gaussian noise scaled so that ``||v_delta - v_clean|| = delta_rel * ||v_clean||``.

    The noise direction is i.i.d. standard normal drawn from ``seed``; its
    length is then fixed exactly, so the absolute noise level is known.
    """
    v_clean = check_vector(v_clean, name="v_clean")
    delta_rel = check_scalar(delta_rel, "delta_rel", low=0.0)
    delta_abs = delta_rel * float(np.linalg.norm(v_clean))
    xi = np.random.default_rng(seed).standard_normal(v_clean.size)
    if delta_abs == 0.0:
        v_delta = v_clean.copy()
    else:
        v_delta = v_clean + xi * (delta_abs / np.linalg.norm(xi))
    return NoisyMeasurement(v_delta, v_clean.copy(), delta_abs, delta_rel)
