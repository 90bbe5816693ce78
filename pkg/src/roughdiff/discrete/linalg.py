"""Eigenvalue and operator-norm measurements for assembled systems."""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import IterationLimitError, PreconditionError, SingularityError, UsageError
from .system import HatSystem

__all__ = [
    "DENSE_LIMIT",
    "min_eigenvalue",
    "inverse_operator_norm",
    "min_singular_value",
]

#: Largest total dimension handled with dense factorizations.
DENSE_LIMIT = 3000


def _factor(A):
    try:
        return spla.splu(sp.csc_matrix(A))
    except RuntimeError as exc:
        raise SingularityError(f"factorization failed: {exc}", 0.0) from None


def min_eigenvalue(system: HatSystem, rtol: float = 1e-8, max_iter: int = 10_000,
                   seed: int = 0) -> float:
    """Smallest eigenvalue of the primal matrix by inverse power iteration."""
    A = system.primal
    lu = _factor(A)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    lam = np.inf
    for _ in range(max_iter):
        w = lu.solve(v)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            raise SingularityError("inverse iteration broke down", 0.0)
        v = w / nw
        new = float(v @ (A @ v))
        if new <= 0:
            raise PreconditionError("primal matrix is not positive definite")
        if abs(new - lam) <= rtol * new:
            return new
        lam = new
    raise IterationLimitError(f"inverse iteration did not converge in {max_iter} steps")


def _dense_inverse(K: np.ndarray) -> np.ndarray:
    evals, evecs = scipy.linalg.eigh(K)
    smin = float(np.min(np.abs(evals)))
    if smin <= 1e-13 * float(np.max(np.abs(evals))):
        raise SingularityError(f"system is singular (smallest singular value {smin:.3e})", smin)
    return (evecs / evals) @ evecs.T


def _power_norm(apply, n: int, tol: float, max_iter: int, seed: int) -> float:
    # apply is symmetric, so iterate with its square (normal operator).
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = apply(apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.sqrt(nw))
        v = w / nw
        if abs(new - est) <= tol * new:
            return new
        est = new
    raise IterationLimitError(f"power iteration did not converge in {max_iter} steps")


def inverse_operator_norm(system: HatSystem, other: HatSystem | None = None,
                          tol: float = 1e-6, max_iter: int = 10_000, seed: int = 0) -> float:
    """Spectral norm of ``K^{-1}`` or of ``K1^{-1} - K2^{-1}``.

    Dense symmetric eigendecomposition up to :data:`DENSE_LIMIT` unknowns
    (singular values of a symmetric matrix are the moduli of its eigenvalues),
    power iteration on the normal operator with sparse LU solves beyond.
    """
    if other is not None and other.block.shape != system.block.shape:
        raise UsageError("systems have different dimensions")
    n = system.dim
    if n <= DENSE_LIMIT:
        inv1 = _dense_inverse(system.block.toarray())
        if other is None:
            return float(np.max(np.abs(scipy.linalg.eigvalsh(inv1))))
        diff = inv1 - _dense_inverse(other.block.toarray())
        diff = 0.5 * (diff + diff.T)
        return float(np.max(np.abs(scipy.linalg.eigvalsh(diff))))
    lu1 = _factor(system.block)
    if other is None:
        return _power_norm(lu1.solve, n, tol, max_iter, seed)
    lu2 = _factor(other.block)
    return _power_norm(lambda v: lu1.solve(v) - lu2.solve(v), n, tol, max_iter, seed)


def min_singular_value(K, shift: float = 1e-9) -> float:
    """Smallest singular value of a symmetric matrix ``K``.

    Dense eigenvalues for small matrices; otherwise shift-invert Lanczos close
    to zero. The small ``shift`` keeps the factorization defined when ``K`` is
    exactly singular.
    """
    if sp.issparse(K) and K.shape[0] > DENSE_LIMIT:
        scale = float(abs(K).sum(axis=1).max())
        vals = spla.eigsh(sp.csc_matrix(K), k=2, sigma=shift * scale, which="LM",
                          return_eigenvectors=False)
        return float(np.min(np.abs(vals)))
    dense = K.toarray() if sp.issparse(K) else np.asarray(K)
    return float(np.min(np.abs(scipy.linalg.eigvalsh(dense))))
