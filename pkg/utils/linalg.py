"""
Small dense linear-algebra kernels: Schur pivots, a Gram-Schmidt oracle and
cyclic Jacobi rotations for symmetric matrices.
"""
import logging

import numpy as np
from scipy import linalg

from utils.exceptions import NotPositiveDefiniteError

logger = logging.getLogger(__name__)


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def eig_ratio(a: np.ndarray) -> float:
    """min eigenvalue / max |eigenvalue| of a symmetric matrix (0 for the zero matrix)."""
    w = linalg.eigvalsh(symmetrize(a))
    top = np.max(np.abs(w)) if w.size else 0.0
    if top == 0.0:
        return 0.0
    return float(w[0] / top)


def schur_pivots(g: np.ndarray, rank_tol: float = 1e-10):
    """
    Sequential Schur-complement pivots of a PSD matrix.

    ``pivots[i]`` is the squared residual of element ``i`` after projecting it
    off elements ``0..i-1``; ``coeffs[i, :i]`` are the projection
    coefficients. Rank-deficient leading blocks use the minimal-norm
    (pseudo-inverse) coefficients and a zero pivot.

    Args:
        g (np.ndarray): Symmetric PSD matrix, ideally with unit diagonal.
        rank_tol (float): Relative rank tolerance.

    Returns:
        tuple: (pivots, coeffs)
    """
    g = symmetrize(np.asarray(g, dtype=float))
    k = g.shape[0]
    scale = max(float(np.max(np.abs(np.diag(g)))) if k else 0.0, np.finfo(float).tiny)
    try:
        chol = linalg.cholesky(g, lower=True)
        diag = np.diag(chol)
        if np.all(diag ** 2 > rank_tol * scale):
            unit = chol / diag[np.newaxis, :]
            inv_unit = linalg.solve_triangular(unit, np.eye(k), lower=True, unit_diagonal=True)
            coeffs = -np.tril(inv_unit, -1)
            return diag ** 2, coeffs
    except linalg.LinAlgError:
        pass

    logger.debug("[LINALG] Cholesky not usable, falling back to minimal-norm pivots")
    pivots = np.zeros(k)
    coeffs = np.zeros((k, k))
    for i in range(k):
        if i == 0:
            pivots[0] = max(g[0, 0], 0.0)
            continue
        block = g[:i, :i]
        b = g[:i, i]
        lam = linalg.pinvh(block, rtol=rank_tol) @ b
        p = g[i, i] - b @ lam
        pivots[i] = p if p > rank_tol * scale else 0.0
        coeffs[i, :i] = lam
    return pivots, coeffs


def gram_schmidt_residuals(g: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """
    Modified Gram-Schmidt in the inner product defined by ``g``.

    Returns the residual energy of each coordinate vector after removing its
    components along the previous ones.
    """
    g = symmetrize(np.asarray(g, dtype=float))
    k = g.shape[0]
    scale = max(float(np.max(np.abs(np.diag(g)))) if k else 0.0, np.finfo(float).tiny)
    basis = []
    residuals = np.zeros(k)
    for i in range(k):
        w = np.zeros(k)
        w[i] = 1.0
        for q in basis:
            w = w - (q @ g @ w) * q
        energy = float(w @ g @ w)
        residuals[i] = energy if energy > rank_tol * scale else 0.0
        if residuals[i] > 0.0:
            basis.append(w / np.sqrt(energy))
    return residuals


def jacobi_eigh(s: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """
    Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Args:
        s (np.ndarray): Symmetric matrix.
        tol (float): Stop when the off-diagonal Frobenius norm falls below
            ``tol`` times the full norm.
        max_sweeps (int): Maximum number of cyclic sweeps.

    Returns:
        tuple: (eigenvalues, eigenvectors as columns), unsorted.
    """
    a = symmetrize(np.array(s, dtype=float))
    n = a.shape[0]
    q = np.eye(n)
    norm = np.linalg.norm(a)
    if n < 2 or norm == 0.0:
        return np.diag(a).copy(), q

    for sweep in range(max_sweeps):
        off = np.sqrt(max(np.sum(a ** 2) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                if a[p, r] == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[p, r], a[r, r] - a[p, p])
                c, sn = np.cos(theta), np.sin(theta)
                rot_p = c * a[:, p] - sn * a[:, r]
                rot_r = sn * a[:, p] + c * a[:, r]
                a[:, p], a[:, r] = rot_p, rot_r
                rot_p = c * a[p, :] - sn * a[r, :]
                rot_r = sn * a[p, :] + c * a[r, :]
                a[p, :], a[r, :] = rot_p, rot_r
                a[p, r] = a[r, p] = 0.0
                qp = c * q[:, p] - sn * q[:, r]
                qr = sn * q[:, p] + c * q[:, r]
                q[:, p], q[:, r] = qp, qr
    else:
        logger.warning("[WARN] Jacobi rotations hit the sweep limit")
    return np.diag(a).copy(), q


def fix_column_signs(v: np.ndarray, tiny: float = 1e-300) -> np.ndarray:
    """Flip columns so that the first nonzero component of each is positive."""
    v = np.array(v, dtype=float)
    for j in range(v.shape[1]):
        nz = np.flatnonzero(np.abs(v[:, j]) > tiny)
        if nz.size and v[nz[0], j] < 0.0:
            v[:, j] = -v[:, j]
    return v


def whitening_factor(a: np.ndarray, spd_tol: float = 1e-12) -> np.ndarray:
    """
    Lower Cholesky factor of an SPD matrix, refusing near-singular input.
    """
    a = symmetrize(np.asarray(a, dtype=float))
    w = linalg.eigvalsh(a)
    if w.size == 0 or w[-1] <= 0.0 or w[0] <= spd_tol * w[-1]:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: min eigenvalue {w[0] if w.size else 0.0!r}, "
            f"max {w[-1] if w.size else 0.0!r}")
    try:
        return linalg.cholesky(a, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"Cholesky failed: {e}")
