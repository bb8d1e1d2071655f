"""Penalized weighted least squares in a spline basis.

For observations ``y``, design ``B``, weight ``M`` and penalty ``L`` the
estimator minimizes ``||M (y - B beta)||^2 + lam ||L beta||^2``. Its hat
matrix ``H = (B'M'MB + lam L'L)^{-1} B'M'M`` maps ``y`` to ``beta_hat`` and
``y - B H y`` is the residual noise estimate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular, svd

from .bspline import PenaltyOperator, SplineFunction, basis_matrix, penalty_operator
from .errors import DomainError, SingularSystemError

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class WeightMatrix:
    """Diagonal weight matrix ``M = diag(diag)``."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        if d.ndim != 1 or not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise DomainError("weights must be a 1-d array of positive finite reals")
        d.flags.writeable = False
        object.__setattr__(self, "diag", d)

    @classmethod
    def identity(cls, n):
        return cls(np.ones(n))

    @property
    def matrix(self):
        return np.diag(self.diag)


@dataclass(frozen=True)
class HatMatrix:
    lam: float
    H: np.ndarray

    def __matmul__(self, y):
        return self.H @ y


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    fitted: np.ndarray
    residual: np.ndarray


def _weight_matrix(M, n):
    if M is None:
        return np.eye(n)
    if isinstance(M, WeightMatrix):
        M = M.matrix
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = np.diag(M)
    if M.shape[1] != n:
        raise DomainError(f"weight matrix has {M.shape[1]} columns, expected {n}")
    return M


def _penalty_matrix(L):
    return L.L if isinstance(L, PenaltyOperator) else np.asarray(L, dtype=float)


def _factor(B, M, L, lam):
    """QR factors of the stacked system ``[M B; sqrt(lam) L]``.

    Returns ``(Q1, R, M)`` with ``Q1`` the rows of ``Q`` facing ``M B``, so
    ``beta = R^{-1} Q1' M y``. Working on the stacked matrix keeps the
    condition number at the square root of the normal matrix's, which
    matters for very large ``lam``.
    """
    if not lam > 0:
        raise DomainError(f"smoothing parameter must be positive, got {lam}")
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    M = _weight_matrix(M, n)
    L = _penalty_matrix(L)
    stacked = np.vstack([M @ B, np.sqrt(lam) * L])
    if stacked.shape[0] < stacked.shape[1]:
        raise SingularSystemError("fewer equations than coefficients")
    Q, R = np.linalg.qr(stacked)
    s = svd(R, compute_uv=False)
    # eigenvalues of B'M'MB + lam L'L are the squared singular values
    if s[0] == 0 or (s[-1] / s[0]) ** 2 < SINGULAR_RTOL:
        ratio = 0.0 if s[0] == 0 else (s[-1] / s[0]) ** 2
        raise SingularSystemError(f"normal matrix is singular at lam={lam:g} (eigenvalue ratio {ratio:.3e})")
    return Q[:M.shape[0]], R, M


def hat_matrix(B, M, L, lam):
    """Hat matrix ``H(lam, M, L)`` of shape ``(d, n)``.

    ``M`` may be a :class:`WeightMatrix`, a weight vector, a full matrix with
    ``n`` columns, or None for the identity; ``L`` a :class:`PenaltyOperator`
    or a matrix with ``d`` columns.
    """
    Q1, R, M = _factor(B, M, L, lam)
    return HatMatrix(float(lam), solve_triangular(R, Q1.T @ M))


def residual_operator(B, M, L, lam):
    """``I - B H(lam, M, L)``, the ``n x n`` map from data to residuals."""
    B = np.asarray(B, dtype=float)
    H = hat_matrix(B, M, L, lam).H
    return np.eye(B.shape[0]) - B @ H


def fit(y, B, M, L, lam):
    """Solve for ``beta_hat`` directly (no explicit hat matrix)."""
    y = np.asarray(y, dtype=float)
    B = np.asarray(B, dtype=float)
    Q1, R, M = _factor(B, M, L, lam)
    beta = solve_triangular(R, Q1.T @ (M @ y))
    fitted = B @ beta
    return FitResult(beta, fitted, y - fitted)


def objective(beta, y, B, M, L, lam):
    """``||M (y - B beta)||^2 + lam ||L beta||^2``."""
    B = np.asarray(B, dtype=float)
    r = _weight_matrix(M, B.shape[0]) @ (np.asarray(y) - B @ beta)
    p = _penalty_matrix(L) @ beta
    return float(r @ r + lam * (p @ p))


def natural_spline_check(knots, y, lam):
    """Fit data placed at the breakpoints and return ``(s''(a), s''(b))``.

    The smoothing spline with data at every knot is natural, so both values
    vanish up to rounding for any ``lam > 0``.
    """
    y = np.asarray(y, dtype=float)
    xs = knots.breakpoints
    if y.shape != xs.shape:
        raise DomainError(f"expected {len(xs)} values, one per breakpoint")
    B = basis_matrix(knots, xs)
    beta = fit(y, B, None, penalty_operator(knots), lam).beta_hat
    ends = SplineFunction(knots, beta)([knots.a, knots.b], deriv=2)
    return float(ends[0]), float(ends[1])
