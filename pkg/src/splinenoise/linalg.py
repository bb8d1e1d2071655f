"""Dense kernels: SVD pseudoinverse, null-space projector, PSD square root,
and the two limit operators of the penalized least-squares hat matrix.

All pseudoinverses go through :func:`pinv`.
"""

import numpy as np

from .errors import DecompositionError, NotPSDError

EPS_SCALE = 100.0


def default_rank_tol(A, s_max=None):
    """Absolute singular-value cutoff ``100 * eps * max(m, n) * s_max``."""
    A = np.asarray(A)
    if s_max is None:
        s_max = np.linalg.norm(A, 2) if A.size else 0.0
    return EPS_SCALE * np.finfo(float).eps * max(A.shape) * s_max


def _as_finite_matrix(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DecompositionError("matrix has non-finite entries")
    return A


def pinv(A, tol=None):
    """Moore-Penrose pseudoinverse via SVD.

    Parameters
    ----------
    A : array_like, shape (m, n)
    tol : float, optional
        Relative cutoff: singular values ``<= tol * s_max`` are treated as
        zero. Defaults to ``100 * eps * max(m, n)``.

    Returns
    -------
    ndarray, shape (n, m)
    """
    A = _as_finite_matrix(A)
    m, n = A.shape
    if A.size == 0:
        return np.zeros((n, m))
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    s_max = s[0] if s.size else 0.0
    cutoff = default_rank_tol(A, s_max) if tol is None else tol * s_max
    keep = s > cutoff
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (Vt.T * s_inv) @ U.T


def matrix_rank(A, tol=None):
    """Numerical rank under the same cutoff as :func:`pinv`."""
    A = _as_finite_matrix(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    cutoff = default_rank_tol(A, s[0]) if tol is None else tol * s[0]
    return int(np.count_nonzero(s > cutoff))


def null_projector(A, tol=None):
    """Orthogonal projector ``I - A^+ A`` onto the null space of ``A``.

    Built as ``V0 V0'`` from the right singular vectors beyond the numerical
    rank (the same cutoff as :func:`pinv`), so a full-column-rank ``A`` gives
    an exactly zero projector instead of rounding noise.
    """
    A = _as_finite_matrix(A)
    n = A.shape[1]
    if A.size == 0:
        return np.eye(n)
    try:
        _, s, Vt = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    cutoff = default_rank_tol(A, s[0]) if tol is None else tol * s[0]
    r = int(np.count_nonzero(s > cutoff))
    V0 = Vt[r:].T
    return V0 @ V0.T


def sqrt_psd(S, sym_tol=1e-10, neg_tol=1e-10):
    """Symmetric PSD square root of a symmetric PSD matrix.

    Eigenvalues in ``[-neg_tol * ||S||, 0)`` are rounding noise and clamped to
    zero; anything more negative raises :class:`NotPSDError`.
    """
    S = _as_finite_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    scale = np.linalg.norm(S, 2) if S.size else 0.0
    if np.max(np.abs(S - S.T), initial=0.0) > sym_tol * max(scale, 1.0):
        raise NotPSDError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    if w.size and w[0] < -neg_tol * scale:
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below -{neg_tol:g} * ||S||")
    Q = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return 0.5 * (Q + Q.T)


def weighted_pinv(B, M, L, tol=None):
    """ML-weighted pseudoinverse ``(I - (L P_{MB})^+ L) (MB)^+ M``.

    When ``N(MB)`` and ``N(L)`` intersect trivially this is the small-lambda
    limit of ``(B'M'MB + lam L'L)^{-1} B'M'M``: among the ``M``-weighted
    least-squares solutions it picks the one with the smallest ``||L beta||``.
    """
    B, M, L = (_as_finite_matrix(X) for X in (B, M, L))
    MB = M @ B
    P = null_projector(MB, tol)
    d = B.shape[1]
    return (np.eye(d) - pinv(L @ P, tol) @ L) @ pinv(MB, tol) @ M


def lambda_inf_limit(B, M, L, tol=None):
    """Large-lambda limit ``(M B P_L)^+ M`` of the hat matrix."""
    B, M, L = (_as_finite_matrix(X) for X in (B, M, L))
    return pinv(M @ B @ null_projector(L, tol), tol) @ M
