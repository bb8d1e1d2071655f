import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cardinal_cubic, curvature_quadrature, scipy_spline
from splinenoise.bspline import (
    Dataset,
    KnotVector,
    SplineFunction,
    basis_matrix,
    column_of,
    delta2_matrix,
    design_matrix,
    eval_basis,
    eval_spline,
    gram_matrix_order2,
    greville_abscissae,
    make_uniform_knots,
    penalty_operator,
    uniform_abscissae,
)
from splinenoise.errors import DomainError


@st.composite
def knot_vectors(draw):
    a = draw(st.floats(-5, 5))
    width = draw(st.floats(0.5, 10))
    K = draw(st.integers(1, 8))
    gaps = np.array(draw(st.lists(st.floats(0.2, 1.0), min_size=K + 1, max_size=K + 1)))
    cuts = a + width * np.cumsum(gaps)[:-1] / gaps.sum()
    return KnotVector(a, a + width, tuple(cuts))


class TestKnots:
    def test_uniform_grid(self):
        np.testing.assert_allclose(make_uniform_knots(0, 1, 4).interior, [0.2, 0.4, 0.6, 0.8])

    @pytest.mark.parametrize("a, b, K, expected", [
        (0, 1, 1, [0.5]),
        (2, 4, 3, [2.5, 3.0, 3.5]),
    ])
    def test_uniform_examples(self, a, b, K, expected):
        np.testing.assert_allclose(make_uniform_knots(a, b, K).interior, expected)

    def test_extended_sequence(self):
        t = make_uniform_knots(0, 1, 4).extended
        assert len(t) == 12
        np.testing.assert_array_equal(t[:4], 0)
        np.testing.assert_array_equal(t[-4:], 1)
        assert np.all(np.diff(t) >= 0)

    @pytest.mark.parametrize("a, b", [(1, 1), (2, 0)])
    def test_invalid_interval(self, a, b):
        with pytest.raises(DomainError):
            make_uniform_knots(a, b, 3)

    def test_rejects_bad_interior(self):
        with pytest.raises(DomainError):
            KnotVector(0, 1, (0.5, 0.4))
        with pytest.raises(DomainError):
            KnotVector(0, 1, (0.0, 0.5))
        with pytest.raises(DomainError):
            make_uniform_knots(0, 1, 0)

    def test_dataset(self):
        ds = Dataset(uniform_abscissae(0, 1, 6), np.zeros(6))
        assert ds.n == 6
        np.testing.assert_allclose(np.diff(ds.xs), 0.2)
        with pytest.raises(DomainError):
            Dataset([0, 0.5, 0.4], [1, 2, 3])


class TestBasis:
    def test_left_endpoint(self, knots4):
        vals = [eval_basis(knots4, j, 4, 0.0) for j in range(8)]
        assert vals == [1.0] + [0.0] * 7

    def test_right_endpoint_uses_left_limit(self, knots4):
        vals = [eval_basis(knots4, j, 4, 1.0) for j in range(8)]
        assert vals == [0.0] * 7 + [1.0]

    def test_cardinal_centre_is_two_thirds(self, knots4):
        # column 3 has support [0, 0.8] with simple knots
        assert eval_basis(knots4, 3, 4, 0.4) == pytest.approx(2 / 3, abs=1e-15)

    def test_cardinal_matches_piecewise_form(self, knots4):
        h = 0.2
        x = np.linspace(0, 0.8, 201)
        np.testing.assert_allclose(basis_matrix(knots4, x)[:, 3], cardinal_cubic(x / h), atol=1e-14)

    def test_matches_scipy(self, knots4):
        x = np.linspace(0, 1, 301)
        for j in range(8):
            ref = scipy_spline(knots4, np.eye(8)[j])(x)
            ref[-1] = 1.0 if j == 7 else 0.0   # scipy has no value at x = b
            np.testing.assert_allclose(basis_matrix(knots4, x)[:, j], ref, atol=1e-14)

    def test_order_two_hats(self, knots4):
        # order-2 functions on [0, 0, .2, ..., .8, 1, 1] are hats
        x = np.array([0.0, 0.1, 0.2, 0.5, 1.0])
        H = basis_matrix(knots4, x, order=2)
        assert H.shape == (5, 6)
        np.testing.assert_allclose(H.sum(axis=1), 1)
        np.testing.assert_allclose(H[1, :2], [0.5, 0.5])
        np.testing.assert_allclose(H[3, 2:4], [0.5, 0.5])

    def test_out_of_domain(self, knots4):
        with pytest.raises(DomainError):
            eval_basis(knots4, 0, 4, 1.0001)
        with pytest.raises(DomainError):
            design_matrix(knots4, [-0.1, 0.5])
        with pytest.raises(DomainError):
            eval_basis(knots4, 8, 4, 0.5)

    def test_partition_of_unity_sampled(self, knots4):
        x = np.random.default_rng(3).uniform(0, 1, 1000)
        assert np.max(np.abs(basis_matrix(knots4, x).sum(axis=1) - 1)) <= 1e-12

    @given(knot_vectors(), st.lists(st.floats(0, 1), min_size=1, max_size=20))
    @settings(max_examples=60, deadline=None)
    def test_partition_nonneg_local_support(self, knots, us):
        x = knots.a + (knots.b - knots.a) * np.array(us)
        x = np.clip(x, knots.a, knots.b)
        S = basis_matrix(knots, x)
        np.testing.assert_allclose(S.sum(axis=1), 1, atol=1e-12)
        assert np.all(S >= -1e-15)
        t = knots.extended
        for j in range(knots.dim):
            outside = (x < t[j]) | (x > t[j + 4])
            assert np.all(S[outside, j] == 0)

    def test_column_offset(self):
        assert column_of(-3) == 0
        assert column_of(3) == 6
        assert column_of(-1, order=2) == 0


class TestDesignMatrix:
    def test_shape_rows_sum(self, design):
        B = design(6)
        assert B.shape == (6, 8)
        np.testing.assert_allclose(B.sum(axis=1), 1, atol=1e-14)

    def test_at_breakpoints(self, knots4):
        B = design_matrix(knots4, knots4.breakpoints)
        assert B.shape == (6, 8)
        np.testing.assert_array_equal(B[0], np.eye(8)[0])
        np.testing.assert_array_equal(B[-1], np.eye(8)[-1])

    def test_local_support_and_range(self, design):
        B = design(10)
        assert np.all(np.count_nonzero(B, axis=1) <= 4)
        assert np.all((B >= 0) & (B <= 1))


class TestDelta2:
    def test_shape(self, knots4):
        assert delta2_matrix(knots4).shape == (6, 8)

    def test_constant_annihilated(self, knots4):
        np.testing.assert_allclose(delta2_matrix(knots4) @ np.ones(8), 0, atol=1e-12)

    def test_greville_reproduces_identity(self, knots4):
        g = greville_abscissae(knots4)
        x = np.linspace(0, 1, 57)
        np.testing.assert_allclose(scipy_spline(knots4, g)(x[:-1]), x[:-1], atol=1e-14)
        np.testing.assert_allclose(delta2_matrix(knots4) @ g, 0, atol=1e-12)

    @given(knot_vectors(), st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_affine_annihilated(self, knots, c0, c1):
        beta = c0 + c1 * greville_abscissae(knots)
        D = delta2_matrix(knots)
        assert np.max(np.abs(D @ beta)) <= 1e-9 * (1 + abs(c0) + abs(c1)) * np.max(np.abs(D))

    def test_second_derivative_identity(self, knots4):
        rng = np.random.default_rng(0)
        beta = rng.standard_normal(8)
        x = rng.uniform(0, 1, 50)
        lhs = basis_matrix(knots4, x, order=2) @ (delta2_matrix(knots4) @ beta)
        ref = scipy_spline(knots4, beta).derivative(2)(x)
        np.testing.assert_allclose(lhs, ref, rtol=1e-10, atol=1e-10)

    def test_against_finite_differences(self, knots4):
        rng = np.random.default_rng(1)
        beta = rng.standard_normal(8)
        f = SplineFunction(knots4, beta)
        # points away from knots so the stencil stays in one cubic piece
        x = np.array([0.07, 0.31, 0.53, 0.71, 0.93])
        h = 1e-3
        fd = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
        exact = basis_matrix(knots4, x, order=2) @ (delta2_matrix(knots4) @ beta)
        np.testing.assert_allclose(exact, fd, rtol=1e-5, atol=1e-4)


class TestGram:
    def test_closed_form_entries(self, knots4):
        h = 0.2
        R = gram_matrix_order2(knots4)
        assert R[0, 0] == pytest.approx(h / 3)
        assert R[-1, -1] == pytest.approx(h / 3)
        for i in range(1, 5):
            assert R[i, i] == pytest.approx(2 * h / 3)
        for i in range(5):
            assert R[i, i + 1] == pytest.approx(h / 6)

    def test_band_and_symmetry(self, knots4):
        R = gram_matrix_order2(knots4)
        np.testing.assert_array_equal(R, R.T)
        i, j = np.indices(R.shape)
        assert np.all(R[np.abs(i - j) >= 2] == 0)
        assert np.linalg.eigvalsh(R).min() > 0

    def test_nonuniform_against_quad(self):
        from scipy.integrate import quad

        knots = KnotVector(0.0, 2.0, (0.3, 1.1, 1.2))
        R = gram_matrix_order2(knots)
        bp = knots.breakpoints

        def hat(i, x):
            return basis_matrix(knots, [x], order=2)[0, i]

        for i in range(5):
            for j in range(i, min(i + 2, 5)):
                ref = sum(quad(lambda x: hat(i, x) * hat(j, x), lo, hi)[0] for lo, hi in zip(bp[:-1], bp[1:]))
                assert R[i, j] == pytest.approx(ref, rel=1e-12, abs=1e-14)


class TestPenalty:
    def test_constant_is_free(self, penalty4):
        assert penalty4.roughness(np.ones(8)) == pytest.approx(0, abs=1e-18)

    def test_single_basis_function_positive(self, penalty4):
        assert penalty4.roughness(np.eye(8)[column_of(3)]) > 0

    def test_quadrature_equivalence(self, knots4, penalty4):
        rng = np.random.default_rng(7)
        for _ in range(100):
            beta = rng.standard_normal(8)
            ref = curvature_quadrature(knots4, beta)
            assert abs(penalty4.roughness(beta) - ref) <= 1e-10 * ref

    @given(knot_vectors(), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_quadrature_nonuniform(self, knots, seed):
        beta = np.random.default_rng(seed).standard_normal(knots.dim)
        P = penalty_operator(knots)
        ref = curvature_quadrature(knots, beta)
        assert P.roughness(beta) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    def test_factorization(self, penalty4):
        from splinenoise.linalg import sqrt_psd

        np.testing.assert_allclose(penalty4.L, sqrt_psd(penalty4.gram) @ penalty4.delta2)
        np.testing.assert_allclose(penalty4.L.T @ penalty4.L,
                                   penalty4.delta2.T @ penalty4.gram @ penalty4.delta2, atol=1e-9)

    def test_arrays_read_only(self, penalty4):
        with pytest.raises(ValueError):
            penalty4.L[0, 0] = 1.0


class TestEvalSpline:
    def test_constant(self, knots4):
        f = SplineFunction(knots4, np.ones(8))
        for x in (0.0, 0.33, 1.0):
            assert f(x) == pytest.approx(1)
            assert f(x, 1) == pytest.approx(0, abs=1e-12)
            assert f(x, 2) == pytest.approx(0, abs=1e-10)

    def test_second_derivative_consistency(self, knots4):
        beta = np.random.default_rng(2).standard_normal(8)
        x = np.linspace(0.01, 0.99, 17)
        np.testing.assert_allclose(
            eval_spline(SplineFunction(knots4, beta), x, 2),
            basis_matrix(knots4, x, order=2) @ (delta2_matrix(knots4) @ beta))

    def test_first_derivative_finite_difference(self, knots4):
        beta = np.random.default_rng(4).standard_normal(8)
        f = SplineFunction(knots4, beta)
        x = np.array([0.05, 0.29, 0.5, 0.66, 0.95])
        for h in (1e-2, 1e-3):
            fd = (f(x + h) - f(x - h)) / (2 * h)
            # O(h^2) with s''' bounded on each piece
            assert np.max(np.abs(fd - f(x, 1))) <= 50 * h**2 * np.max(np.abs(beta)) / 0.2**3

    def test_endpoint_one_sided(self, knots4):
        beta = np.random.default_rng(5).standard_normal(8)
        f = SplineFunction(knots4, beta)
        ref = scipy_spline(knots4, beta)
        assert f(0.0, 2) == pytest.approx(float(ref.derivative(2)(0.0)), rel=1e-10)
        assert f(1.0, 2) == pytest.approx(float(ref.derivative(2)(1 - 1e-12)), rel=1e-6)
        assert f(1.0) == pytest.approx(beta[-1])

    def test_bad_inputs(self, knots4):
        f = SplineFunction(knots4, np.ones(8))
        with pytest.raises(DomainError):
            f(0.5, 3)
        with pytest.raises(DomainError):
            f(2.0)
        with pytest.raises(DomainError):
            SplineFunction(knots4, np.ones(7))
