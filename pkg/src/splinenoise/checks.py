"""Self-check battery bundled with the CLI.

Each check returns a :class:`CheckResult`; :func:`run_oracle_checks` runs them
all and writes a plain-text report.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bspline import basis_matrix, design_matrix, make_uniform_knots, penalty_operator, uniform_abscissae
from .estimator import hat_matrix, natural_spline_check
from .experiment import NoiseModel, weight_matrix
from .linalg import lambda_inf_limit, pinv, weighted_pinv

REPORT_NAME = "oracle_report.txt"


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_matrix(rng, max_dim=30):
    """Random matrix with a random (possibly deficient) rank."""
    m, n = rng.integers(1, max_dim + 1, size=2)
    r = int(rng.integers(0, min(m, n) + 1))
    if r == 0:
        return np.zeros((m, n))
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


def penrose_residuals(A, X):
    """Relative violations of the four Penrose conditions for ``X = A^+``."""
    na = max(np.linalg.norm(A), 1e-300)
    nx = max(np.linalg.norm(X), 1e-300)
    AX, XA = A @ X, X @ A
    return (
        np.linalg.norm(AX @ A - A) / na,
        np.linalg.norm(XA @ X - X) / nx,
        np.linalg.norm(AX - AX.T) / max(np.linalg.norm(AX), 1.0),
        np.linalg.norm(XA - XA.T) / max(np.linalg.norm(XA), 1.0),
    )


def curvature_energy(knots, beta, points=5):
    """``int |s''|^2`` by Gauss-Legendre quadrature on each knot interval.

    On every interval the spline is rebuilt as a cubic from four of its
    values, so ``s''`` here never touches the difference operator.
    """
    nodes, weights = np.polynomial.legendre.leggauss(points)
    bp = knots.breakpoints
    u = np.array([1, 3, 5, 7]) / 8
    V = np.vander(u, 4, increasing=True)
    uq = 0.5 * (nodes + 1)
    total = 0.0
    for lo, hi in zip(bp[:-1], bp[1:]):
        h = hi - lo
        c = np.linalg.solve(V, basis_matrix(knots, lo + h * u) @ beta)
        s2 = (2 * c[2] + 6 * c[3] * uq) / h**2
        total += 0.5 * h * np.sum(weights * s2**2)
    return total


def check_penrose(rng, count=100, tol=1e-9):
    worst = 0.0
    for _ in range(count):
        A = random_matrix(rng)
        worst = max(worst, *penrose_residuals(A, pinv(A)))
    return CheckResult("penrose_conditions", worst <= tol, f"max relative violation {worst:.3e} (tol {tol:g})")


def check_partition_of_unity(knots, rng, tol=1e-12):
    xs = np.concatenate(([knots.a, knots.b], rng.uniform(knots.a, knots.b, 1000)))
    err = np.max(np.abs(basis_matrix(knots, xs).sum(axis=1) - 1))
    return CheckResult("partition_of_unity", err <= tol, f"max |sum - 1| = {err:.3e}")


def check_penalty(knots, penalty, rng, count=100, tol=1e-10):
    worst = 0.0
    for _ in range(count):
        beta = rng.standard_normal(knots.dim)
        ref = curvature_energy(knots, beta)
        worst = max(worst, abs(penalty.roughness(beta) - ref) / ref)
    return CheckResult("penalty_quadrature", worst <= tol, f"max relative error {worst:.3e} (tol {tol:g})")


def _spline_problem(n, penalty, knots, sigma=0.5):
    B = design_matrix(knots, uniform_abscissae(knots.a, knots.b, n))
    M = weight_matrix(NoiseModel(n, 1, sigma), "oracle").matrix
    return B, M, penalty.L


def check_small_lambda(knots, penalty, rate_tol=0.02):
    # The error is first order in lam with a large constant (the curvature
    # penalty scale), so check monotone decay at the linear rate instead of a
    # fixed absolute level.
    B, M, L = _spline_problem(10, penalty, knots)
    ref = weighted_pinv(B, M, L)
    errs = [np.linalg.norm(hat_matrix(B, M, L, lam).H - ref) / np.linalg.norm(ref)
            for lam in (1e-2, 1e-4, 1e-6, 1e-8)]
    ok = all(np.diff(errs) < 0) and errs[-1] / errs[-2] <= rate_tol
    return CheckResult("lambda_to_zero_limit", ok, "relative errors " + ", ".join(f"{e:.2e}" for e in errs))


def check_large_lambda(knots, penalty, tol=1e-4):
    B, M, L = _spline_problem(10, penalty, knots)
    ref = lambda_inf_limit(B, M, L)
    errs = [np.linalg.norm(hat_matrix(B, M, L, lam).H - ref) / (1 + np.linalg.norm(ref))
            for lam in (1e2, 1e4, 1e6, 1e8)]
    ok = errs[-1] <= tol and all(np.diff(errs) < 0)
    return CheckResult("lambda_to_infinity_limit", ok, "relative errors " + ", ".join(f"{e:.2e}" for e in errs))


def check_maximal_rank(knots, penalty, tol=1e-8):
    B, M, L = _spline_problem(6, penalty, knots)
    err = np.linalg.norm(B @ weighted_pinv(B, M, L) @ B - B) / np.linalg.norm(B)
    return CheckResult("maximal_rank_identity", err <= tol, f"relative error {err:.3e}")


def check_natural_spline(knots, rng, count=20, tol=1e-7):
    worst = 0.0
    for _ in range(count):
        y = rng.standard_normal(knots.K + 2)
        for lam in (0.1, 1.0, 10.0):
            ends = natural_spline_check(knots, y, lam)
            worst = max(worst, max(map(abs, ends)) / np.max(np.abs(y)))
    return CheckResult("natural_spline_boundary", worst <= tol, f"max |s''(end)| / max|y| = {worst:.3e}")


def check_tikhonov(knots, tol=1e-10):
    B = design_matrix(knots, uniform_abscissae(knots.a, knots.b, 10))
    d = B.shape[1]
    worst = 0.0
    for lam in (0.1, 1.0, 10.0):
        ref = np.linalg.inv(B.T @ B + lam * np.eye(d)) @ B.T
        worst = max(worst, np.linalg.norm(hat_matrix(B, None, np.eye(d), lam).H - ref) / np.linalg.norm(ref))
    return CheckResult("tikhonov_identity", worst <= tol, f"max relative error {worst:.3e}")


def oracle_checks(penalty_fn=penalty_operator, seed=0):
    """Run the whole battery on the ``K = 4`` problem on ``[0, 1]``."""
    rng = np.random.default_rng(seed)
    knots = make_uniform_knots(0.0, 1.0, 4)
    penalty = penalty_fn(knots)
    return [
        check_penrose(rng),
        check_partition_of_unity(knots, rng),
        check_penalty(knots, penalty, rng),
        check_small_lambda(knots, penalty),
        check_large_lambda(knots, penalty),
        check_maximal_rank(knots, penalty),
        check_natural_spline(knots, rng),
        check_tikhonov(knots),
    ]


def run_oracle_checks(out_dir, penalty_fn=penalty_operator):
    """Run the battery, write the report into ``out_dir`` and return an exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = oracle_checks(penalty_fn)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    (out / REPORT_NAME).write_text("\n".join(lines) + "\n")
    return 0 if all(r.passed for r in results) else 1
