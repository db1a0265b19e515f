import numpy as np
import pytest

from latentgraph.penalty import GolazoBounds, PenaltySpec, compile_penalty, golazo_prox, golazo_value


def offdiag_bounds(d, lo, hi):
    L = np.full((d, d), lo)
    U = np.full((d, d), hi)
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(U, 0.0)
    return GolazoBounds(L=L, U=U)


def scalar_prox_bruteforce(z, lo, hi, t):
    """Grid-search argmin of t*max(lo*x, hi*x) + (x - z)^2 / 2."""
    # integer grid scaled by the step so x = 0 is hit exactly; infinite bounds
    # make the objective infinite everywhere except one side of it
    xs = np.arange(-100000, 100001) * 1e-4
    with np.errstate(invalid="ignore"):
        pen = np.maximum(lo * xs, hi * xs)
    pen = np.where(xs == 0.0, 0.0, pen)
    obj = t * pen + 0.5 * (xs - z) ** 2
    return xs[np.argmin(obj)]


class TestBounds:
    def test_rejects_sign_violation(self):
        with pytest.raises(ValueError, match="L <= 0 <= U"):
            GolazoBounds(L=np.full((2, 2), 0.1), U=np.ones((2, 2)))

    def test_rejects_asymmetry(self):
        L = np.zeros((2, 2))
        U = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(ValueError, match="symmetric"):
            GolazoBounds(L=L, U=U)

    def test_rejects_nan(self):
        L = np.zeros((2, 2))
        U = np.ones((2, 2))
        U[0, 0] = np.nan
        with pytest.raises(ValueError, match="NaN"):
            GolazoBounds(L=L, U=U)


class TestValue:
    def test_symmetric_lasso_value(self):
        k = np.array([[1.0, -0.5], [-0.5, 1.0]])
        b = offdiag_bounds(2, -1.0, 1.0)
        # each off-diagonal term is max{0.5, -0.5} = 0.5
        assert golazo_value(k, b) == pytest.approx(1.0)

    def test_mtp2_feasible_is_zero(self):
        b = offdiag_bounds(3, 0.0, np.inf)
        k = np.array([[2.0, -0.3, 0.0], [-0.3, 2.0, -0.1], [0.0, -0.1, 2.0]])
        assert golazo_value(k, b) == 0.0

    def test_mtp2_infeasible_is_infinite(self):
        b = offdiag_bounds(2, 0.0, np.inf)
        k = np.array([[1.0, 0.1], [0.1, 1.0]])
        assert golazo_value(k, b) == np.inf

    def test_convexity_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            d = 3
            b = offdiag_bounds(d, -float(rng.uniform(0, 2)), float(rng.uniform(0, 2)))
            k1 = rng.normal(size=(d, d))
            k2 = rng.normal(size=(d, d))
            t = float(rng.uniform())
            lhs = golazo_value(t * k1 + (1 - t) * k2, b)
            rhs = t * golazo_value(k1, b) + (1 - t) * golazo_value(k2, b)
            assert lhs <= rhs + 1e-10

    def test_monotone_in_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            k = rng.normal(size=(3, 3))
            lo, hi = -float(rng.uniform(0.1, 1)), float(rng.uniform(0.1, 1))
            narrow = offdiag_bounds(3, lo, hi)
            wide = offdiag_bounds(3, lo - 0.5, hi + 0.5)
            # larger box means a larger max at every entry
            assert golazo_value(k, wide) >= golazo_value(k, narrow) - 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            golazo_value(np.eye(3), offdiag_bounds(2, -1, 1))


class TestProx:
    def test_soft_threshold_entry(self):
        b = offdiag_bounds(2, -1.0, 1.0)
        z = np.array([[0.0, 0.5], [0.5, 0.0]])
        out = golazo_prox(z, b, 0.1)
        assert out[0, 1] == pytest.approx(0.4)

    def test_positive_part_clamped(self):
        b = offdiag_bounds(2, 0.0, np.inf)
        z = np.array([[0.0, 0.5], [0.5, 0.0]])
        out = golazo_prox(z, b, 0.3)
        assert out[0, 1] == 0.0

    def test_zero_pattern_entry_exact_zero(self):
        L = np.array([[0.0, -np.inf], [-np.inf, 0.0]])
        U = np.array([[0.0, np.inf], [np.inf, 0.0]])
        b = GolazoBounds(L=L, U=U)
        z = np.array([[1.0, -0.5], [-0.5, 1.0]])
        out = golazo_prox(z, b, 0.7)
        assert out[0, 1] == 0.0 and out[1, 0] == 0.0

    def test_matches_scalar_bruteforce(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            z = float(rng.uniform(-5, 5))
            lo = -float(rng.uniform(0, 3))
            hi = float(rng.uniform(0, 3))
            if rng.uniform() < 0.2:
                lo = -np.inf
            if rng.uniform() < 0.2:
                hi = np.inf
            t = float(rng.uniform(0.01, 2.0))
            b = GolazoBounds(L=np.array([[lo]]), U=np.array([[hi]]))
            out = golazo_prox(np.array([[z]]), b, t)[0, 0]
            ref = scalar_prox_bruteforce(z, lo, hi, t)
            assert abs(out - ref) < 1e-3

    def test_symmetric_lasso_specialization(self):
        rng = np.random.default_rng(3)
        lam = 0.37
        z = rng.normal(size=1000)
        b = GolazoBounds(L=np.full((1, 1), -lam), U=np.full((1, 1), lam))
        for zi in z:
            out = golazo_prox(np.array([[zi]]), b, 1.0)[0, 0]
            ref = np.sign(zi) * max(abs(zi) - lam, 0.0)
            assert abs(out - ref) < 1e-12

    def test_sign_feasibility_is_exact(self):
        rng = np.random.default_rng(4)
        d = 4
        L = np.zeros((d, d))
        U = np.full((d, d), np.inf)
        np.fill_diagonal(U, 0.0)
        b = GolazoBounds(L=L, U=U)
        for _ in range(50):
            out = golazo_prox(rng.normal(size=(d, d)) * 5, b, float(rng.uniform(0.01, 3)))
            off = out[~np.eye(d, dtype=bool)]
            assert np.all(off <= 0.0)

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError, match="step"):
            golazo_prox(np.eye(2), offdiag_bounds(2, -1, 1), 0.0)


class TestCompile:
    def test_mtp2(self):
        b = compile_penalty(PenaltySpec("mtp2"), 3, 1.0, 0.5)
        off = ~np.eye(3, dtype=bool)
        assert np.all(b.L[off] == 0.0) and np.all(b.U[off] == np.inf)
        assert np.all(b.L[np.eye(3, dtype=bool)] == 0.0)

    def test_lasso_paper_scale(self):
        b = compile_penalty(PenaltySpec("lasso"), 2, 1.0, 0.5)
        assert b.L[0, 1] == -0.5 and b.U[0, 1] == 0.5

    def test_zero_pattern_over_lasso(self):
        crossing = [(0, 2), (1, 2)]
        spec = PenaltySpec("zero_pattern", zero_edges=crossing, base="lasso")
        b = compile_penalty(spec, 3, 0.6, 0.5)
        assert b.L[0, 2] == -np.inf and b.U[0, 2] == np.inf
        assert b.L[2, 1] == -np.inf and b.U[2, 1] == np.inf
        assert b.L[0, 1] == pytest.approx(-0.3) and b.U[0, 1] == pytest.approx(0.3)

    def test_positive_lasso_and_sparse_positive(self):
        b = compile_penalty(PenaltySpec("positive_lasso"), 2, 2.0, 0.25)
        assert b.L[0, 1] == 0.0 and b.U[0, 1] == pytest.approx(0.5)
        b = compile_penalty(PenaltySpec("sparse_positive"), 2, 2.0, 0.25)
        assert b.L[0, 1] == pytest.approx(-0.5) and b.U[0, 1] == np.inf

    def test_asymmetric_weights(self):
        w = np.array([[0.0, 2.0], [2.0, 0.0]])
        b = compile_penalty(PenaltySpec("asymmetric", weights=w), 2, 1.0, 0.5)
        assert b.L[0, 1] == -1.0 and b.U[0, 1] == 1.0

    def test_negative_weights_rejected(self):
        w = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(ValueError, match="nonnegative"):
            compile_penalty(PenaltySpec("asymmetric", weights=w), 2, 1.0, 0.5)

    def test_out_of_range_edges_rejected(self):
        spec = PenaltySpec("zero_pattern", zero_edges=[(0, 5)])
        with pytest.raises(ValueError, match="out of range"):
            compile_penalty(spec, 3, 1.0, 1.0)

    def test_spec_field_validation(self):
        with pytest.raises(ValueError, match="zero_edges"):
            PenaltySpec("lasso", zero_edges=[(0, 1)])
        with pytest.raises(ValueError, match="weights"):
            PenaltySpec("mtp2", weights=np.eye(2))
        with pytest.raises(ValueError, match="unknown penalty kind"):
            PenaltySpec("scad")
