"""Binary GLM tests.

The oracle is an independent optimizer (BFGS from scipy) run on the same
penalized log-likelihood; curve-recovery tests simulate labels from a
known monotone probability and check the fit pointwise.
"""

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import expit, log_ndtr, ndtr

from boxinfer.exceptions import DegenerateLabelsError, DomainError
from boxinfer.glm import BinaryGlmModel, fit_binary_glm, predict_prob
from boxinfer.splines import basis_matrix


def penalized_nll(gamma, design, ws, link, ridge):
    eta = design @ gamma
    if link == "probit":
        ll = ws @ log_ndtr(eta) + (1 - ws) @ log_ndtr(-eta)
    else:
        ll = -(ws @ np.logaddexp(0, -eta) + (1 - ws) @ np.logaddexp(0, eta))
    return -(ll - ridge * gamma[1:] @ gamma[1:])


def simulate(rng, n, link, df_truth=None):
    zs = rng.normal(0.0, 1.5, size=n)
    eta = 0.4 + 1.3 * zs
    p = ndtr(eta) if link == "probit" else expit(eta)
    ws = (rng.uniform(size=n) < p).astype(float)
    return zs, ws, p


class TestFitMatchesIndependentOptimizer:
    @pytest.mark.parametrize("link", ["probit", "logit"])
    def test_small_problem(self, link):
        rng = np.random.default_rng(17)
        zs, ws, _ = simulate(rng, 400, link)
        model = fit_binary_glm(zs, ws, link=link, df=4)
        assert model.converged

        design = np.hstack([np.ones((zs.size, 1)), basis_matrix(model.spec, zs)])
        res = minimize(
            penalized_nll,
            np.zeros(5),
            args=(design, ws, link, 1e-6),
            method="BFGS",
            options={"gtol": 1e-10, "maxiter": 2000},
        )
        my_obj = penalized_nll(model.coefficients, design, ws, link, 1e-6)
        # Same objective value; coefficient-space comparison is ill posed
        # when the basis is collinear.
        assert my_obj <= res.fun + 1e-7 * (1 + abs(res.fun))

    def test_gradient_at_solution(self):
        rng = np.random.default_rng(23)
        for link in ["probit", "logit"]:
            zs, ws, _ = simulate(rng, 600, link)
            model = fit_binary_glm(zs, ws, link=link, df=10)
            design = np.hstack([np.ones((zs.size, 1)), basis_matrix(model.spec, zs)])
            g = np.zeros(design.shape[1])
            eps = 1e-6
            base = penalized_nll(model.coefficients, design, ws, link, 1e-6)
            for j in range(design.shape[1]):
                step = np.zeros_like(g)
                step[j] = eps
                g[j] = (
                    penalized_nll(model.coefficients + step, design, ws, link, 1e-6)
                    - base
                ) / eps
            assert np.linalg.norm(g) <= 1e-4 * zs.size


class TestCurveRecovery:
    @pytest.mark.parametrize("link", ["probit", "logit"])
    def test_recovers_monotone_truth(self, link):
        rng = np.random.default_rng(31)
        zs, ws, _ = simulate(rng, 20_000, link)
        model = fit_binary_glm(zs, ws, link=link, df=10)
        grid = np.linspace(-2.5, 2.5, 41)
        truth = ndtr(0.4 + 1.3 * grid) if link == "probit" else expit(0.4 + 1.3 * grid)
        fitted = predict_prob(model, grid)
        assert np.max(np.abs(fitted - truth)) < 0.04

    def test_cross_link_misspecification_still_close(self):
        # Labels from a probit truth, fit with logit: spline flexibility
        # absorbs the link mismatch.
        rng = np.random.default_rng(37)
        zs = rng.normal(0.0, 1.5, size=20_000)
        p = ndtr(0.4 + 1.3 * zs)
        ws = (rng.uniform(size=zs.size) < p).astype(float)
        model = fit_binary_glm(zs, ws, link="logit", df=10)
        grid = np.linspace(-2.0, 2.0, 31)
        assert np.max(np.abs(predict_prob(model, grid) - ndtr(0.4 + 1.3 * grid))) < 0.04


class TestEdgeCases:
    def test_separable_labels_converge(self):
        # Perfect separation: ridge keeps the optimum finite.
        zs = np.linspace(-2, 2, 200)
        ws = (zs > 0.3).astype(float)
        for link in ["probit", "logit"]:
            model = fit_binary_glm(zs, ws, link=link, df=6)
            assert np.all(np.isfinite(model.coefficients))
            p = predict_prob(model, np.array([-1.5, 1.5]))
            assert p[0] < 0.05 and p[1] > 0.95

    def test_single_class_raises(self):
        zs = np.linspace(0, 1, 50)
        with pytest.raises(DegenerateLabelsError):
            fit_binary_glm(zs, np.ones(50))
        with pytest.raises(DegenerateLabelsError):
            fit_binary_glm(zs, np.zeros(50))

    def test_validation(self):
        zs = np.linspace(0, 1, 50)
        ws = (zs > 0.5).astype(float)
        with pytest.raises(DomainError):
            fit_binary_glm(zs, ws, link="cauchit")
        with pytest.raises(DomainError):
            fit_binary_glm(zs, ws[:-1])
        with pytest.raises(DomainError):
            fit_binary_glm(zs, ws + 0.5)
        with pytest.raises(DomainError):
            fit_binary_glm(zs[:5], ws[:5], df=10)

    def test_extreme_covariates_stay_finite(self):
        rng = np.random.default_rng(41)
        zs = np.concatenate([rng.normal(size=300), [50.0, -50.0]])
        ws = (zs + rng.normal(size=302) > 0).astype(float)
        model = fit_binary_glm(zs, ws, link="probit", df=8)
        assert np.all(np.isfinite(model.coefficients))

    def test_predict_clamp(self):
        zs = np.linspace(-2, 2, 300)
        ws = (zs > 0).astype(float)
        model = fit_binary_glm(zs, ws, link="probit", df=6)
        p = predict_prob(model, np.array([-400.0, 400.0]))
        assert p[0] >= 1e-12 and p[1] <= 1 - 1e-12
        assert isinstance(predict_prob(model, 0.1), float)

    def test_iterations_recorded(self):
        rng = np.random.default_rng(43)
        zs, ws, _ = simulate(rng, 500, "logit")
        model = fit_binary_glm(zs, ws, link="logit", df=6)
        assert model.converged and 1 <= model.iterations <= 100
