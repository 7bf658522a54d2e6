import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dataset
from gradsample.errors import DegenerateGradients, SingularGram
from gradsample.linalg import Dataset, solve_full
from gradsample.probabilities import (
    Method,
    ProbabilityVector,
    approx_leverage_probs,
    gradient_probs,
    leverage_probs,
    leverage_scores,
    residual_oracle_probs,
    to_inclusion,
    uniform_probs,
)


class TestUniform:
    def test_values(self):
        np.testing.assert_array_equal(uniform_probs(4).pi, [0.25] * 4)
        np.testing.assert_array_equal(uniform_probs(1).pi, [1.0])

    def test_sums_to_one_exactly(self):
        assert uniform_probs(3).pi.sum() == 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            uniform_probs(0)


class TestProbabilityVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            ProbabilityVector([0.5, 0.6], Method.UNIFORM)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ProbabilityVector([1.5, -0.5], Method.UNIFORM)


class TestLeverage:
    def test_orthonormal_rows(self):
        np.testing.assert_allclose(leverage_probs(np.eye(2)).pi, [0.5, 0.5], rtol=1e-15)

    def test_single_column_closed_form(self):
        np.testing.assert_allclose(leverage_probs([[1.0], [2.0]]).pi, [0.2, 0.8], rtol=1e-14)

    def test_matches_explicit_hat_matrix(self):
        x = np.random.default_rng(21).standard_normal((100, 3))
        h = np.einsum("ij,jk,ik->i", x, np.linalg.inv(x.T @ x), x)
        np.testing.assert_allclose(leverage_probs(x).pi, h / h.sum(), atol=1e-10)

    def test_trace_identity(self):
        x = np.random.default_rng(22).standard_normal((300, 6))
        assert leverage_scores(x).sum() == pytest.approx(6.0, abs=1e-8)

    def test_singular(self):
        with pytest.raises(SingularGram):
            leverage_probs(np.ones((5, 2)))


class TestApproxLeverage:
    def test_identity_sketch_is_exact(self):
        x = np.random.default_rng(3).standard_normal((60, 4))
        approx = approx_leverage_probs(x, 60, sketch=np.eye(60)).pi
        np.testing.assert_allclose(approx, leverage_probs(x).pi, atol=1e-10)

    def test_symmetric_rows(self):
        worst = max(
            np.abs(approx_leverage_probs(np.eye(2), 40, seed).pi - 0.5).max()
            for seed in range(100)
        )
        assert worst <= 0.25

    def test_countsketch_symmetric_rows(self):
        # distinct buckets reproduce the rows up to sign; a collision is rank deficient
        for seed in range(100):
            try:
                pi = approx_leverage_probs(np.eye(2), 40, seed, kind="countsketch").pi
            except SingularGram:
                continue
            np.testing.assert_allclose(pi, [0.5, 0.5], rtol=1e-12)

    @pytest.mark.parametrize("kind", ["gaussian", "countsketch"])
    def test_close_to_exact_on_average(self, kind):
        x = np.random.default_rng(5).standard_normal((500, 4))
        exact = leverage_probs(x).pi
        errs = [
            np.mean(np.abs(approx_leverage_probs(x, 80, seed, kind=kind).pi - exact) / exact)
            for seed in range(50)
        ]
        assert np.mean(errs) <= 0.5

    def test_seeded(self):
        x = np.random.default_rng(5).standard_normal((50, 3))
        a = approx_leverage_probs(x, 30, 9).pi
        np.testing.assert_array_equal(a, approx_leverage_probs(x, 30, 9).pi)

    def test_too_few_sketch_rows(self):
        with pytest.raises(ValueError):
            approx_leverage_probs(np.eye(3), 2, 0)

    def test_rank_deficient_sketch(self):
        with pytest.raises(SingularGram):
            approx_leverage_probs(np.ones((10, 2)), 10, 0)


class TestGradient:
    def test_direct_arithmetic(self):
        data = Dataset([[1.0, 0.0], [0.0, 2.0]], [1.0, 4.0])
        pi = gradient_probs(data, [0.0, 0.0])
        np.testing.assert_allclose(pi.pi, [1 / 9, 8 / 9], rtol=1e-15)
        assert pi.method is Method.GRADIENT

    def test_symmetric_rows_give_uniform(self):
        data = Dataset([[1.0, 0.0], [0.0, -1.0], [0.6, 0.8]], [2.0, 2.0, -2.0])
        np.testing.assert_allclose(gradient_probs(data, [0.0, 0.0]).pi, [1 / 3] * 3, rtol=1e-15)

    def test_illustration_example(self):
        # twelve points y = x + e at x = +-3, +-2.5, ..., +-0.5 with a pilot slope of 0.5
        xs = [s * v for v in (3, 2.5, 2, 1.5, 1, 0.5) for s in (1, -1)]
        noise = np.random.default_rng(2016).normal(0.0, math.sqrt(0.5), 12)
        ys = [xv + float(e) for xv, e in zip(xs, noise)]
        scores = [abs(xv) * abs(yv - 0.5 * xv) for xv, yv in zip(xs, ys)]
        total = math.fsum(scores)
        expected = [s / total for s in scores]
        pi = gradient_probs(Dataset(np.array(xs)[:, None], ys), [0.5])
        np.testing.assert_allclose(pi.pi, expected, rtol=1e-13)

    def test_degenerate(self):
        x = np.random.default_rng(0).standard_normal((10, 2))
        with pytest.raises(DegenerateGradients):
            gradient_probs(Dataset(x, x @ [1.0, 2.0]), [1.0, 2.0])

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_permutation_equivariance(self, seed):
        data = random_dataset(30, 3, seed)
        beta0 = np.random.default_rng(seed).standard_normal(3)
        perm = np.random.default_rng(seed + 1).permutation(30)
        permuted = gradient_probs(Dataset(data.x[perm], data.y[perm]), beta0).pi
        np.testing.assert_allclose(permuted, gradient_probs(data, beta0).pi[perm], rtol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), c=st.floats(1e-3, 1e3))
    def test_residual_scale_invariance(self, seed, c):
        data = random_dataset(30, 3, seed)
        beta0 = np.zeros(3)
        scaled = gradient_probs(Dataset(data.x, c * data.y), c * beta0).pi
        np.testing.assert_allclose(scaled, gradient_probs(data, beta0).pi, rtol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 200))
    def test_normalized(self, seed, n):
        data = random_dataset(n, 2, seed)
        pi = gradient_probs(data, np.ones(2)).pi
        assert abs(pi.sum() - 1.0) <= 1e-12
        assert np.all(pi >= 0)


class TestResidualOracle:
    def test_two_points(self):
        data = Dataset([[1.0], [1.0]], [0.0, 2.0])
        beta = solve_full(data).beta
        np.testing.assert_allclose(beta, [1.0])
        np.testing.assert_allclose(residual_oracle_probs(data, beta).pi, [0.5, 0.5], rtol=1e-15)

    def test_coincides_with_gradient_at_full_solution(self, data_100x3):
        beta = solve_full(data_100x3).beta
        oracle = residual_oracle_probs(data_100x3, beta)
        np.testing.assert_allclose(oracle.pi, gradient_probs(data_100x3, beta).pi, rtol=0, atol=1e-15)
        assert oracle.method is Method.RESIDUAL_ORACLE

    def test_degenerate(self):
        x = np.random.default_rng(0).standard_normal((10, 2))
        data = Dataset(x, x @ [1.0, 2.0])
        with pytest.raises(DegenerateGradients):
            residual_oracle_probs(data, [1.0, 2.0])


class TestToInclusion:
    def test_no_capping(self):
        inc = to_inclusion(uniform_probs(4), 2)
        np.testing.assert_array_equal(inc.p, [0.5] * 4)
        assert inc.expected_size == 2.0
        assert inc.capped_indices.size == 0

    def test_literal_cap(self):
        inc = to_inclusion(ProbabilityVector([0.6, 0.2, 0.2], Method.GRADIENT), 2)
        np.testing.assert_allclose(inc.p, [1.0, 0.4, 0.4], rtol=1e-15)
        assert inc.expected_size == pytest.approx(1.8, rel=1e-15)
        np.testing.assert_array_equal(inc.capped_indices, [0])

    def test_redistributed_cap(self):
        inc = to_inclusion(ProbabilityVector([0.6, 0.2, 0.2], Method.GRADIENT), 2, redistribute=True)
        np.testing.assert_allclose(inc.p, [1.0, 0.5, 0.5], rtol=1e-15)
        assert inc.expected_size == pytest.approx(2.0, rel=1e-15)
        np.testing.assert_array_equal(inc.capped_indices, [0])

    def test_r_at_least_n_selects_everything(self):
        inc = to_inclusion(ProbabilityVector([0.7, 0.2, 0.1], Method.GRADIENT), 5, redistribute=True)
        np.testing.assert_array_equal(inc.p, [1.0, 1.0, 1.0])

    def test_rejects_nonpositive_r(self):
        with pytest.raises(ValueError):
            to_inclusion(uniform_probs(3), 0)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 60), frac=st.floats(0.01, 1.5),
           skew=st.floats(0.1, 4.0))
    def test_redistribute_preserves_mass(self, seed, n, frac, skew):
        w = np.random.default_rng(seed).pareto(skew, n) + 1e-3
        pi = ProbabilityVector(w / w.sum(), Method.GRADIENT)
        r = frac * n
        inc = to_inclusion(pi, r, redistribute=True)
        assert np.all(inc.p <= 1.0) and np.all(inc.p >= 0.0)
        assert inc.p.sum() == pytest.approx(min(r, n), abs=1e-10)
        literal = to_inclusion(pi, r)
        assert np.all(literal.p <= 1.0)
        np.testing.assert_allclose(literal.p, np.minimum(1.0, r * pi.pi))
