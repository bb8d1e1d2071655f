"""Cubic B-spline bases on clamped knot vectors.

Basis functions of order ``k`` (degree ``k - 1``) live on the sub-sequence of
the clamped extended knot vector that keeps ``k``-fold endpoint multiplicity,
so the cubic basis has ``K + 4`` members and the order-2 (hat) basis that
carries second derivatives has ``K + 2``.

Indexing
--------
Columns are stored 0-based. A basis function that the usual literature writes
as ``S_{j,k}`` with ``j`` running from ``-(k - 1)`` to ``K`` sits in column
``j + k - 1``; :func:`column_of` is the only place this offset is applied.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError
from .linalg import sqrt_psd

CUBIC = 4


def column_of(index, order=CUBIC):
    """Storage column of the basis function ``S_{index,order}``.

    >>> column_of(3)
    6
    >>> column_of(-1, order=2)
    0
    """
    return int(index) + order - 1


@dataclass(frozen=True)
class KnotVector:
    """Interval ``[a, b]`` with strictly increasing interior knots.

    ``extended`` is the clamped sequence of length ``K + 8``: four copies of
    ``a``, the interior knots, four copies of ``b``.
    """

    a: float
    b: float
    interior: tuple = ()

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
            raise DomainError(f"invalid interval [{self.a}, {self.b}]")
        interior = tuple(float(k) for k in self.interior)
        if len(interior) < 1:
            raise DomainError("at least one interior knot is required")
        arr = np.asarray(interior)
        if np.any(np.diff(arr) <= 0) or arr[0] <= a or arr[-1] >= b:
            raise DomainError("interior knots must be strictly increasing inside (a, b)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "interior", interior)

    @property
    def K(self):
        return len(self.interior)

    @property
    def dim(self):
        """Dimension of the cubic spline space, ``K + 4``."""
        return self.K + CUBIC

    @property
    def breakpoints(self):
        """``a, kappa_1, ..., kappa_K, b`` as an array."""
        return np.array((self.a, *self.interior, self.b))

    @cached_property
    def extended(self):
        t = np.concatenate(([self.a] * CUBIC, self.interior, [self.b] * CUBIC))
        t.flags.writeable = False
        return t

    def sequence(self, order=CUBIC):
        """Knot sequence carrying the order-``order`` basis."""
        if not 1 <= order <= CUBIC:
            raise DomainError(f"order must be in 1..4, got {order}")
        trim = CUBIC - order
        return self.extended[trim:len(self.extended) - trim]

    def num_basis(self, order=CUBIC):
        return self.K + order


def make_uniform_knots(a, b, K):
    """Clamped knot vector with ``K`` equally spaced interior knots on ``[a, b]``."""
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K}")
    if not a < b:
        raise DomainError(f"invalid interval [{a}, {b}]")
    K = int(K)
    h = (b - a) / (K + 1)
    return KnotVector(a, b, tuple(a + h * i for i in range(1, K + 1)))


@dataclass(frozen=True)
class Dataset:
    """Observations ``ys`` at strictly increasing abscissae ``xs``."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise DomainError("xs and ys must be 1-d arrays of equal length")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("xs must be strictly increasing")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self):
        return len(self.xs)


def uniform_abscissae(a, b, n):
    """``n`` equally spaced points from ``a`` to ``b`` inclusive."""
    if n < 2:
        raise DomainError(f"need at least two abscissae, got n={n}")
    return np.linspace(a, b, int(n))


def _check_domain(knots, xs):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    bad = ~((xs >= knots.a) & (xs <= knots.b))
    if np.any(bad):
        raise DomainError(f"abscissa {xs[bad][0]!r} outside [{knots.a}, {knots.b}]")
    return xs


def _basis_values(seq, order, xs):
    # Cox-de Boor on all functions at once; half-open intervals are clipped to
    # the first/last non-empty span so x = b takes the left limit.
    spans = np.flatnonzero(seq[1:] > seq[:-1])
    mu = np.clip(np.searchsorted(seq, xs, side="right") - 1, spans[0], spans[-1])
    vals = np.zeros((len(xs), len(seq) - 1))
    vals[np.arange(len(xs)), mu] = 1.0
    x = xs[:, None]
    for k in range(2, order + 1):
        m = len(seq) - k
        left, right = seq[:m], seq[k:k + m]
        d1 = seq[k - 1:k - 1 + m] - left
        d2 = right - seq[1:1 + m]
        w1 = np.divide(x - left, d1, out=np.zeros((len(xs), m)), where=d1 > 0)
        w2 = np.divide(right - x, d2, out=np.zeros((len(xs), m)), where=d2 > 0)
        vals = w1 * vals[:, :m] + w2 * vals[:, 1:m + 1]
    return vals


def basis_matrix(knots, xs, order=CUBIC):
    """Values of every order-``order`` basis function at ``xs``.

    Returns an array of shape ``(len(xs), K + order)``.
    """
    xs = _check_domain(knots, xs)
    return _basis_values(knots.sequence(order), order, xs)


def eval_basis(knots, j, order, x):
    """Value of the basis function in storage column ``j`` of the given order at ``x``.

    Right-continuous at interior knots; at ``x = b`` the left limit is used so
    the cubic basis still sums to one there.
    """
    n = knots.num_basis(order)
    if not 0 <= j < n:
        raise DomainError(f"basis column {j} out of range 0..{n - 1} for order {order}")
    return float(basis_matrix(knots, [x], order)[0, j])


def design_matrix(knots, xs):
    """The ``n x (K + 4)`` matrix of cubic basis values at the abscissae."""
    return basis_matrix(knots, xs, CUBIC)


def greville_abscissae(knots):
    """Knot averages ``(t_{i+1} + t_{i+2} + t_{i+3}) / 3`` of the cubic basis.

    Coefficients ``c_i = alpha + beta * g_i`` reproduce ``alpha + beta * x``.
    """
    t = knots.extended
    return np.array([t[i + 1:i + CUBIC].mean() for i in range(knots.dim)])


def derivative_matrix(knots, order):
    """Map coefficients of an order-``order`` spline to those of its derivative.

    The derivative is a spline of order ``order - 1`` on the trimmed sequence;
    row ``m`` carries ``(order - 1) / (t[m + order] - t[m + 1])`` on the
    difference ``c[m + 1] - c[m]``. Zero-length spans give a zero row.
    """
    if not 2 <= order <= CUBIC:
        raise DomainError(f"order must be in 2..4, got {order}")
    t = knots.sequence(order)
    n = knots.num_basis(order)
    D = np.zeros((n - 1, n))
    for m in range(n - 1):
        span = t[m + order] - t[m + 1]
        if span > 0:
            w = (order - 1) / span
            D[m, m] = -w
            D[m, m + 1] = w
    return D


def delta2_matrix(knots):
    """Weighted second-difference operator, shape ``(K + 2, K + 4)``.

    ``delta2_matrix(knots) @ beta`` are the order-2 coefficients of ``s''``.
    """
    return derivative_matrix(knots, 3) @ derivative_matrix(knots, 4)


def gram_matrix_order2(knots):
    """Gram matrix of the order-2 basis, ``R[i, j] = int S_i S_j dx``.

    Two-point Gauss-Legendre per knot interval, exact for the quadratic
    integrand.
    """
    nodes, weights = np.polynomial.legendre.leggauss(2)
    bp = knots.breakpoints
    lo, hi = bp[:-1], bp[1:]
    half = 0.5 * (hi - lo)
    xs = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    w = (half[:, None] * weights[None, :]).ravel()
    S = basis_matrix(knots, xs.ravel(), order=2)
    R = (S * w[:, None]).T @ S
    return 0.5 * (R + R.T)


@dataclass(frozen=True)
class PenaltyOperator:
    """``(delta2, gram, L)`` with ``||L beta||^2 = int |s''|^2``."""

    delta2: np.ndarray
    gram: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        for name in ("delta2", "gram", "L"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def roughness(self, beta):
        """``||L beta||^2`` for one coefficient vector."""
        v = self.L @ np.asarray(beta, dtype=float)
        return float(v @ v)


def penalty_operator(knots):
    """Assemble ``delta2``, the order-2 Gram matrix and ``L = R^(1/2) delta2``."""
    delta2 = delta2_matrix(knots)
    gram = gram_matrix_order2(knots)
    return PenaltyOperator(delta2, gram, sqrt_psd(gram) @ delta2)


@dataclass(frozen=True)
class SplineFunction:
    """Cubic spline ``sum_j coeffs[j] * S_{j,4}`` on ``knots``."""

    knots: KnotVector
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.knots.dim,):
            raise DomainError(f"expected {self.knots.dim} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x, deriv=0):
        return eval_spline(self, x, deriv)


def eval_spline(f, x, deriv=0):
    """Value of the ``deriv``-th derivative of ``f`` at ``x``.

    Accepts a scalar or an array of abscissae. Derivatives are one-sided at
    the endpoints and right-continuous at interior knots.
    """
    if deriv not in (0, 1, 2):
        raise DomainError(f"deriv must be 0, 1 or 2, got {deriv}")
    c = f.coeffs
    order = CUBIC
    for _ in range(deriv):
        c = derivative_matrix(f.knots, order) @ c
        order -= 1
    out = basis_matrix(f.knots, x, order) @ c
    return float(out[0]) if np.ndim(x) == 0 else out
