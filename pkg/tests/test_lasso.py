"""Lasso solver tests.

Oracles: closed-form soft thresholding for orthogonal designs, a bound-
constrained split-variable reformulation solved by L-BFGS-B, and the KKT
conditions themselves (sufficient for optimality of a convex problem).
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from boxinfer.exceptions import DomainError
from boxinfer.lasso import (
    GramProblem,
    cv_lambda,
    geometric_grid,
    kkt_violation,
    lambda_range,
    lasso_cd,
    lasso_path,
)
from boxinfer.stats import SeededStream


def soft_threshold(c, lam):
    return np.sign(c) * np.maximum(np.abs(c) - lam, 0.0)


def lbfgsb_objective(problem, lam):
    # beta = u - v with u, v >= 0 turns the L1 term linear.
    p = problem.p

    def fun(z):
        u, v = z[:p], z[p:]
        b = u - v
        quad = 0.5 * b @ problem.gram @ b - problem.xty @ b
        grad_b = problem.gram @ b - problem.xty
        grad = np.concatenate([grad_b + lam, -grad_b + lam])
        return quad + lam * np.sum(u + v), grad

    res = minimize(
        fun,
        np.zeros(2 * p),
        jac=True,
        method="L-BFGS-B",
        bounds=[(0, None)] * (2 * p),
        options={"maxiter": 5000, "ftol": 1e-14, "gtol": 1e-10},
    )
    return res.fun


def objective(problem, lam, beta):
    return 0.5 * beta @ problem.gram @ beta - problem.xty @ beta + lam * np.sum(np.abs(beta))


def random_problem(rng, p, n_factor=3):
    n = n_factor * p
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    k = max(1, p // 4)
    beta[rng.choice(p, size=k, replace=False)] = rng.normal(0, 2, size=k)
    y = X @ beta + rng.standard_normal(n)
    return GramProblem(X.T @ X, X.T @ y)


class TestSolver:
    def test_identity_gram_is_soft_threshold(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = int(rng.integers(1, 30))
            c = rng.normal(0, 2, size=p)
            lam = float(rng.uniform(0.1, 2.0))
            beta = lasso_cd(GramProblem(np.eye(p), c), lam)
            np.testing.assert_allclose(beta, soft_threshold(c, lam), atol=1e-12)

    def test_one_dimensional_closed_form(self):
        for g, c, lam in [(2.0, 3.0, 1.0), (0.5, -2.0, 0.7), (1.0, 0.3, 0.5)]:
            beta = lasso_cd(GramProblem(np.array([[g]]), np.array([c])), lam)
            expect = soft_threshold(np.array([c]), lam) / g
            np.testing.assert_allclose(beta, expect, atol=1e-12)

    def test_matches_bound_constrained_reformulation(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            p = int(rng.integers(2, 15))
            prob = random_problem(rng, p)
            lam = float(rng.uniform(0.5, 3.0)) * np.sqrt(prob.gram[0, 0])
            beta = lasso_cd(prob, lam)
            mine = objective(prob, lam, beta)
            oracle = lbfgsb_objective(prob, lam)
            assert mine <= oracle + 1e-7 * (1.0 + abs(oracle))

    def test_kkt_certificate_random_instances(self):
        rng = np.random.default_rng(29)
        for _ in range(40):
            p = int(rng.integers(2, 51))
            prob = random_problem(rng, p)
            lam_max = np.max(np.abs(prob.xty))
            lam = float(rng.uniform(0.01, 1.0)) * lam_max
            beta = lasso_cd(prob, lam)
            assert kkt_violation(prob, lam, beta) <= 1e-8

    def test_exact_zeros_off_support(self):
        rng = np.random.default_rng(5)
        prob = random_problem(rng, 12)
        beta = lasso_cd(prob, 0.5 * np.max(np.abs(prob.xty)))
        assert np.any(beta == 0.0)

    def test_empty_support_at_lambda_max(self):
        rng = np.random.default_rng(7)
        prob = random_problem(rng, 8)
        lam_max = float(np.max(np.abs(prob.xty)))
        np.testing.assert_array_equal(lasso_cd(prob, lam_max), np.zeros(8))

    def test_warm_start_agrees_with_cold(self):
        rng = np.random.default_rng(11)
        prob = random_problem(rng, 10)
        lam = 0.3 * np.max(np.abs(prob.xty))
        cold = lasso_cd(prob, lam)
        warm = lasso_cd(prob, lam, warm_start=rng.normal(size=10))
        np.testing.assert_allclose(warm, cold, atol=1e-7 * (1 + np.max(np.abs(cold))))

    def test_validation(self):
        prob = GramProblem(np.eye(3), np.ones(3))
        with pytest.raises(DomainError):
            lasso_cd(prob, 0.0)
        with pytest.raises(DomainError):
            lasso_cd(prob, -1.0)
        with pytest.raises(DomainError):
            lasso_cd(prob, 1.0, warm_start=np.ones(4))
        with pytest.raises(DomainError):
            GramProblem(np.eye(3) * -1.0, np.ones(3))
        with pytest.raises(DomainError):
            GramProblem(np.array([[1.0, 0.5], [0.4, 1.0]]), np.ones(2))
        with pytest.raises(DomainError):
            GramProblem(np.eye(2), np.ones(3))


class TestPath:
    def test_path_matches_fresh_solves(self):
        rng = np.random.default_rng(17)
        prob = random_problem(rng, 15)
        lam_max = np.max(np.abs(prob.xty))
        grid = geometric_grid(0.02 * lam_max, lam_max, 30)
        path = lasso_path(prob, grid)
        for i in [0, 7, 29]:
            fresh = lasso_cd(prob, grid[i])
            np.testing.assert_allclose(
                path.betas[i], fresh, atol=1e-6 * (1 + np.max(np.abs(fresh)))
            )
        assert len(path.supports) == 30
        np.testing.assert_array_equal(path.supports[0], [])

    def test_rejects_bad_grids(self):
        prob = GramProblem(np.eye(2), np.ones(2))
        for bad in [[1.0, 1.0], [0.5, 1.0], [1.0, -0.5], []]:
            with pytest.raises(DomainError):
                lasso_path(prob, bad)


class TestLambdaRange:
    def test_rule_against_bruteforce(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            prob = random_problem(rng, 12)
            lam_min, lam_max = lambda_range(prob, num=40)
            assert lam_max == pytest.approx(np.max(np.abs(prob.xty)))
            cap = int(np.floor(np.sqrt(0.8 * 12)))
            grid = geometric_grid(0.01 * lam_max, lam_max, 40)
            sizes = [np.count_nonzero(lasso_cd(prob, lam)) for lam in grid]
            over = [i for i, s in enumerate(sizes) if s > cap]
            expect = grid[over[0] - 1] if over else grid[-1]
            assert lam_min == pytest.approx(expect)

    def test_weak_signal_descends_to_floor(self):
        # Tiny coefficients keep the support under the cap everywhere.
        rng = np.random.default_rng(23)
        X = rng.standard_normal((60, 10))
        y = 0.01 * X[:, 0] + rng.standard_normal(60)
        prob = GramProblem(X.T @ X, X.T @ y)
        lam_min, lam_max = lambda_range(prob, num=30)
        cap = int(np.floor(np.sqrt(8.0)))
        sizes = [
            np.count_nonzero(lasso_cd(prob, lam))
            for lam in geometric_grid(0.01 * lam_max, lam_max, 30)
        ]
        if max(sizes) <= cap:
            assert lam_min == pytest.approx(0.01 * lam_max)

    def test_zero_xty_rejected(self):
        with pytest.raises(DomainError):
            lambda_range(GramProblem(np.eye(3), np.zeros(3)))


class TestCvLambda:
    def _data(self, seed=31, n=80, p=10):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, p))
        beta = np.zeros(p)
        beta[:3] = [3.0, -2.0, 2.5]
        y = X @ beta + rng.standard_normal(n)
        return X, y

    def test_deterministic(self):
        X, y = self._data()
        grid = geometric_grid(0.1, 20.0, 25)
        s = SeededStream(5, 9)
        assert cv_lambda(X, y, 5, grid, s) == cv_lambda(X, y, 5, grid, s)

    def test_strong_signal_picks_interior_lambda(self):
        X, y = self._data()
        lam_max = np.max(np.abs(X.T @ y))
        grid = geometric_grid(0.01 * lam_max, lam_max, 40)
        lam = cv_lambda(X, y, 5, grid, SeededStream(1, 0))
        # With sparse strong signal the best penalty is neither endpoint.
        assert grid[-1] < lam < grid[0]
        beta = lasso_cd(GramProblem(X.T @ X, X.T @ y), lam)
        assert set(np.flatnonzero(beta)) >= {0, 1, 2}

    def test_tie_breaks_to_larger_lambda(self):
        X = np.random.default_rng(3).standard_normal((40, 4))
        y = np.zeros(40)
        grid = geometric_grid(0.5, 5.0, 10)
        # All penalties give beta = 0 and identical errors.
        assert cv_lambda(X, y, 4, grid, SeededStream(0, 0)) == grid[0]

    def test_validation(self):
        X, y = self._data()
        grid = geometric_grid(0.1, 10.0, 5)
        with pytest.raises(DomainError):
            cv_lambda(X, y, 1, grid, SeededStream(0, 0))
        with pytest.raises(DomainError):
            cv_lambda(X[:5], y[:5], 5, grid, SeededStream(0, 0))
        with pytest.raises(DomainError):
            cv_lambda(X, y[:-1], 5, grid, SeededStream(0, 0))
