import numpy as np
import pytest

import oracles
from latentgraph import matcore
from latentgraph.exceptions import DivergenceError
from latentgraph.gauss_admm import (
    AdmmParams,
    b_update,
    gaussian_loglik,
    m_update,
    solve_latent_gaussian,
)
from latentgraph.penalty import GolazoBounds, PenaltySpec, compile_penalty

TIGHT = dict(eps1=1e-11, eps2=1e-11, max_iter=500000)


class TestParams:
    def test_defaults_satisfy_convergence_conditions(self):
        p = AdmmParams(lambda_n=0.1)
        assert p.tau > (2 + p.alpha) / 2
        assert p.r1 > p.sigma and p.r2 > p.sigma
        assert p.rho == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(lambda_n=-1.0),
            dict(lambda_n=0.1, sigma=0.0),
            dict(lambda_n=0.1, alpha=2.0),
            dict(lambda_n=0.1, varsigma=1.0),
            dict(lambda_n=0.1, rho=-0.1),
            dict(lambda_n=0.1, max_iter=0),
        ],
    )
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            AdmmParams(**kwargs)


class TestLoglik:
    def test_identity(self):
        assert gaussian_loglik(np.eye(4), np.eye(4)) == pytest.approx(-4.0)

    def test_zero_trace_term(self):
        assert gaussian_loglik(np.diag([2.0, 2.0]), np.zeros((2, 2))) == pytest.approx(2 * np.log(2))

    def test_matches_cholesky_oracle(self):
        rng = np.random.default_rng(0)
        k = oracles.random_spd(rng, 4)
        s = oracles.random_spd(rng, 4)
        chol = np.linalg.cholesky(k)
        ref = 2.0 * float(np.sum(np.log(np.diag(chol)))) - float(np.trace(k @ s))
        assert gaussian_loglik(k, s) == pytest.approx(ref, rel=1e-12)

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="positive definite"):
            gaussian_loglik(np.diag([1.0, -1.0]), np.eye(2))


def foc_residual(m, s, a, b, lam, m_prev, params):
    return np.max(np.abs(
        s - np.linalg.inv(m)
        + params.sigma * (m - a + b - lam / params.sigma)
        + params.rho * params.sigma * (m - m_prev)
    ))


class TestMUpdate:
    def test_identity_fixed_point(self):
        params = AdmmParams(lambda_n=0.1)
        eye = np.eye(3)
        m, _ = m_update(eye, eye, np.zeros((3, 3)), np.zeros((3, 3)), eye, params)
        assert np.max(np.abs(m - eye)) < 1e-12
        assert foc_residual(m, eye, eye, np.zeros((3, 3)), np.zeros((3, 3)), eye, params) < 1e-12

    def test_scalar_quadratic_root(self):
        # sigma m^2 + v m - 1 = 0 with v = 1: m = (-1 + sqrt(5)) / 2
        params = AdmmParams(lambda_n=0.0)
        s = np.array([[2.0]])
        m, _ = m_update(s, np.array([[1.0]]), np.zeros((1, 1)), np.zeros((1, 1)), s, params)
        assert m[0, 0] == pytest.approx((-1 + np.sqrt(5)) / 2, abs=1e-12)

    def test_foc_residual_random(self):
        rng = np.random.default_rng(1)
        for trial in range(100):
            d = int(rng.integers(2, 6))
            params = AdmmParams(
                lambda_n=0.1,
                sigma=float(rng.uniform(0.5, 2.0)),
                rho=float(rng.uniform(0.0, 0.5)),
            )
            s = oracles.random_spd(rng, d)
            a = oracles.sym(rng.normal(size=(d, d)))
            b = oracles.random_spd(rng, d, ridge=0.0)
            lam = oracles.sym(rng.normal(size=(d, d)))
            m_prev = oracles.random_spd(rng, d)
            m, x = m_update(s, a, b, lam, m_prev, params)
            assert np.all(x > 0)
            assert foc_residual(m, s, a, b, lam, m_prev, params) < 1e-8


class TestBUpdate:
    def test_full_shrinkage_to_zero(self):
        params = AdmmParams(lambda_n=1.0)
        out = b_update(np.zeros((3, 3)), np.zeros((3, 3)), params)
        assert np.all(out == 0.0)

    def test_projection_fixed_point_at_zero_penalty(self):
        rng = np.random.default_rng(2)
        params = AdmmParams(lambda_n=0.0)
        b = oracles.random_spd(rng, 4, ridge=0.0)
        out = b_update(b, np.zeros((4, 4)), params)
        assert np.max(np.abs(out - b)) < 1e-12

    def test_equals_psd_project_composition(self):
        rng = np.random.default_rng(3)
        params = AdmmParams(lambda_n=0.3)
        for _ in range(50):
            d = int(rng.integers(2, 7))
            b = oracles.sym(rng.normal(size=(d, d)))
            lam_half = oracles.sym(rng.normal(size=(d, d)))
            out = b_update(b, lam_half, params)
            target = b + (lam_half - params.lambda_n * np.eye(d)) / (params.tau * params.r2)
            ref = matcore.psd_project(target)
            assert np.array_equal(out, ref)
            assert np.linalg.eigvalsh(out)[0] >= -1e-12


class TestSolve:
    def test_small_lasso_instance_against_reference(self):
        bounds = compile_penalty(PenaltySpec("lasso"), 2, 0.1, 1.0)
        params = AdmmParams(lambda_n=0.1, **TIGHT)
        res = solve_latent_gaussian(np.eye(2), bounds, params)
        ref_obj, ref_a, ref_b = oracles.cvx_latent_gaussian(np.eye(2), bounds, 0.1)
        assert res.converged
        assert np.max(np.abs(res.A - ref_a)) < 1e-4
        assert np.max(np.abs(res.B - ref_b)) < 1e-4
        assert np.max(np.abs(res.B)) < 1e-8
        assert abs(res.A[0, 1]) < 1e-10

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(4)
        for d in (2, 3, 5):
            for _ in range(3):
                s = oracles.random_spd(rng, d)
                bounds = oracles.random_finite_bounds(rng, d)
                lam = float(rng.uniform(0.05, 0.5))
                params = AdmmParams(lambda_n=lam, **TIGHT)
                res = solve_latent_gaussian(s, bounds, params)
                obj = oracles.gaussian_objective(s, bounds, lam, res.A, res.B)
                ref_obj, ref_a, ref_b = oracles.cvx_latent_gaussian(s, bounds, lam)
                assert res.converged
                assert abs(obj - ref_obj) <= 1e-6 * max(1.0, abs(ref_obj))
                assert np.max(np.abs(res.A - ref_a)) < 1e-4
                assert np.max(np.abs(res.B - ref_b)) < 1e-4

    def test_mtp2_feasible_at_every_iteration(self):
        rng = np.random.default_rng(5)
        s = oracles.random_spd(rng, 5)
        bounds = compile_penalty(PenaltySpec("mtp2"), 5, 1.0, 1.0)
        off = ~np.eye(5, dtype=bool)
        seen = []

        def check(_k, _m, a, _b):
            seen.append(np.all(a[off] <= 0.0))

        res = solve_latent_gaussian(s, bounds, AdmmParams(lambda_n=0.1), callback=check)
        assert res.converged
        assert len(seen) == res.iterations
        assert all(seen)
        assert np.all(res.A[off] <= 0.0)

    def test_stopping_criteria_honored(self):
        rng = np.random.default_rng(6)
        s = oracles.random_spd(rng, 4)
        bounds = oracles.random_finite_bounds(rng, 4)
        params = AdmmParams(lambda_n=0.2)
        res = solve_latent_gaussian(s, bounds, params)
        assert res.converged
        assert res.rel_chg < params.eps1
        assert res.ier < params.eps2
        assert np.linalg.eigvalsh(res.M)[0] > 0
        assert np.linalg.eigvalsh(res.B)[0] >= -1e-10

    def test_objective_monotone_after_burn_in(self):
        rng = np.random.default_rng(7)
        s = oracles.random_spd(rng, 5)
        bounds = oracles.random_finite_bounds(rng, 5)
        res = solve_latent_gaussian(s, bounds, AdmmParams(lambda_n=0.2))
        trace = res.objective_trace[5:]
        upticks = np.diff(trace)
        assert np.all(upticks <= 1e-7)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        s = oracles.random_spd(rng, 4)
        bounds = oracles.random_finite_bounds(rng, 4)
        params = AdmmParams(lambda_n=0.15)
        res1 = solve_latent_gaussian(s, bounds, params)
        res2 = solve_latent_gaussian(s, bounds, params)
        assert np.array_equal(res1.M, res2.M)
        assert np.array_equal(res1.objective_trace, res2.objective_trace)

    def test_max_iter_returns_unconverged(self):
        rng = np.random.default_rng(9)
        s = oracles.random_spd(rng, 4)
        bounds = oracles.random_finite_bounds(rng, 4)
        res = solve_latent_gaussian(s, bounds, AdmmParams(lambda_n=0.1, max_iter=3))
        assert not res.converged
        assert res.iterations == 3

    def test_rejects_dimension_mismatch(self):
        bounds = compile_penalty(PenaltySpec("lasso"), 3, 0.1, 0.5)
        with pytest.raises(ValueError, match="dimension"):
            solve_latent_gaussian(np.eye(2), bounds, AdmmParams(lambda_n=0.1))

    def test_rejects_indefinite_covariance(self):
        bounds = compile_penalty(PenaltySpec("lasso"), 2, 0.1, 0.5)
        with pytest.raises(ValueError, match="semidefinite"):
            solve_latent_gaussian(np.diag([1.0, -1.0]), bounds, AdmmParams(lambda_n=0.1))
