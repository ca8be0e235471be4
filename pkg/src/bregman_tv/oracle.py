"""Brute-force reference implementations for tests.

Nothing here calls into the modules it is meant to check: the gradient
matrix is assembled entry by entry, prox maps are found by lattice search,
the objective is re-summed from dense matrices, and singular values come
from a cyclic Jacobi eigen-solver.  Hard size caps keep them exact and fast.
"""

import itertools

import numpy as np

MAX_GRID = 64
MAX_LATTICE_DIM = 3
MAX_EXHAUSTIVE_POINTS = 5 * 10**7


class OracleRefusal(ValueError):
    """Raised when a problem exceeds an oracle's size cap."""


def dense_gradient_matrix(width, height):
    """Explicit ``2N x N`` forward-difference matrix for a ``height x width`` grid.

    Rows ``0..N-1`` are x-differences, rows ``N..2N-1`` y-differences, both
    in row-major pixel order; rows at the replicate boundary are zero.
    """
    n = width * height
    if n > MAX_GRID:
        raise OracleRefusal(f"grid of {n} pixels exceeds cap {MAX_GRID}")
    G = np.zeros((2 * n, n))
    for y in range(height):
        for x in range(width):
            k = y * width + x
            if x + 1 < width:
                G[k, k] = -1.0
                G[k, k + 1] = 1.0
            if y + 1 < height:
                G[n + k, k] = -1.0
                G[n + k, k + width] = 1.0
    return G


def zero_rows(points):
    return np.zeros(len(points))


def nonneg_indicator_rows(points):
    return np.where(np.all(points >= 0, axis=1), 0.0, np.inf)


def linf_ball_indicator_rows(points, radius=1.0):
    return np.where(np.all(np.abs(points) <= radius + 1e-12, axis=1), 0.0, np.inf)


def _axis(lo, hi, spacing):
    n = int(round((hi - lo) / spacing))
    return lo + spacing * np.arange(n + 1)


def _grid(axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def lattice_prox_search(g, v, box=(-5.0, 5.0), spacing=1e-3, coarse=0.25, window=2, factor=5):
    """Minimise ``g(x) + 0.5 ||x - v||^2`` over lattice points of ``box^d``.

    ``g`` maps an ``(n_points, d)`` array to ``n_points`` values (``inf``
    allowed).  A full ``spacing`` lattice on ``[-5, 5]^3`` has ~1e12 points,
    so the search runs level by level: an exhaustive pass at ``coarse``
    spacing, then exhaustive passes on ``+-window`` cells around the
    incumbent, each ``factor`` times finer, until ``spacing`` is reached.
    All levels lie on lattices anchored at ``box[0]``.  For separable ``g``
    (both indicators used here) the objective is separable too, so each
    level's minimiser is within half a cell of the true one per coordinate
    and the refinement window cannot miss it.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    d = v.size
    if d > MAX_LATTICE_DIM:
        raise OracleRefusal(f"dimension {d} exceeds cap {MAX_LATTICE_DIM}")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    lo, hi = box

    def best_of(points):
        vals = g(points) + 0.5 * np.sum((points - v) ** 2, axis=1)
        return points[int(np.argmin(vals))]

    h = max(coarse, spacing)
    x = best_of(_grid([_axis(lo, hi, h)] * d))
    while h > spacing * (1 + 1e-9):
        h_new = max(h / factor, spacing)
        axes = []
        for xi in x:
            a = max(lo, xi - window * h)
            b = min(hi, xi + window * h)
            # snap to the fine lattice anchored at lo
            a = lo + np.ceil((a - lo) / h_new - 1e-9) * h_new
            b = lo + np.floor((b - lo) / h_new + 1e-9) * h_new
            axes.append(_axis(a, b, h_new))
        x = best_of(_grid(axes))
        h = h_new
    return x


def exhaustive_minimizer_F(T_dense, v_delta, alpha, u0, box=(0.0, 1.5), spacing=5e-3,
                           width=None, height=1):
    """Lattice minimiser of ``0.5||Tu - v||^2 + alpha D_J(u, u0) + h(u)`` for ``N <= 3``.

    The image is a ``height x width`` grid (default a single row).  The
    Bregman anchor subgradient is ``sign(G u0)``.  Returns
    ``(u_best, F_best)``.
    """
    T = np.asarray(T_dense, dtype=float)
    n = T.shape[1]
    if n > MAX_LATTICE_DIM:
        raise OracleRefusal(f"{n} unknowns exceed cap {MAX_LATTICE_DIM}")
    width = n if width is None else width
    G = dense_gradient_matrix(width, height)
    v = np.asarray(v_delta, dtype=float).ravel()
    u0 = np.asarray(u0, dtype=float).ravel()
    w0 = np.sign(G @ u0)
    q0 = G.T @ w0
    J0 = np.abs(G @ u0).sum()

    axis = _axis(box[0], box[1], spacing)
    axis = axis[axis >= 0] if box[0] < 0 else axis
    if axis.size**n > MAX_EXHAUSTIVE_POINTS:
        raise OracleRefusal(f"lattice of {axis.size ** n} points exceeds cap")

    best_val, best_u = np.inf, None
    rest = _grid([axis] * (n - 1)) if n > 1 else np.zeros((1, 0))
    for first in axis:
        pts = np.hstack([np.full((len(rest), 1), first), rest])
        r = pts @ T.T - v
        data = 0.5 * np.sum(r * r, axis=1)
        breg = np.abs(pts @ G.T).sum(axis=1) - J0 - (pts - u0) @ q0
        vals = data + alpha * breg
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_u = float(vals[k]), pts[k].copy()
    return best_u, best_val


def jacobi_eigenvalues(S, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be square and symmetric")
    scale = np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A**2) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p, q in itertools.combinations(range(n), 2):
            apq = A[p, q]
            if abs(apq) <= 1e-18 * scale:
                continue
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            if abs(theta) > 1e150:
                t = 0.5 / theta
            else:
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * cp - s * cq
            A[:, q] = s * cp + c * cq
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c * rp - s * rq
            A[q, :] = s * rp + c * rq
    return np.sort(np.diag(A))


def dense_spectral_norm(matrix):
    """Largest singular value via Jacobi on ``M^T M``."""
    M = np.asarray(matrix, dtype=float)
    return float(np.sqrt(max(jacobi_eigenvalues(M.T @ M)[-1], 0.0)))
