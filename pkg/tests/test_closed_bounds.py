import numpy as np
import pytest

from basketbounds.closed_bounds import (
    ConvexChain,
    hobson_lambda_bound,
    lower_no_forwards,
    synthetic_strikes,
    two_option_reduction,
    upper_no_forwards,
    upper_with_forwards,
)
from basketbounds.core import ArbitrageError, FeasibilityError, MarketInstance, BasketQuote, Sense
from basketbounds.distributions import grid_oracle, upper_certificate_axes
from basketbounds.lp_backend import EQ, LE, LinearProgram, solve

from conftest import GOLDEN_STRIKES, market_from_vectors, random_feasible

GOLDEN_UPPER = (1.71, 1.37, 1.03, 1.03, 1.03)


class TestUpperWithForwards:
    def test_golden_row(self, golden):
        p, q, K, w = golden
        for strike, expected in zip(GOLDEN_STRIKES, GOLDEN_UPPER):
            res = upper_with_forwards(p, q, K, w, strike)
            assert res.value == pytest.approx(expected, abs=0.005)

    def test_golden_breakpoint(self, golden):
        p, q, K, w = golden
        res = upper_with_forwards(p, q, K, w, 3.84)
        assert res.certificate.beta_star == pytest.approx(0.714, abs=1e-9)

    def test_single_asset_at_quoted_strike_returns_price(self):
        res = upper_with_forwards([1.61], [7.0], [7.0], [1.0], 7.0)
        assert res.value == 1.61  # exact

    def test_zero_strike_returns_basket_forward(self, golden):
        p, q, K, w = golden
        res = upper_with_forwards(p, q, K, w, 0.0)
        assert res.value == pytest.approx(float(w @ q), rel=1e-12)

    def test_rejects_infeasible_data(self):
        with pytest.raises(FeasibilityError) as err:
            upper_with_forwards([3.0], [2.0], [1.0], [1.0], 1.0)
        assert any(v.inequality == "p < q" for v in err.value.violations)

    def test_monotone_in_strike(self, golden):
        p, q, K, w = golden
        strikes = np.linspace(0.0, 10.0, 41)
        values = [upper_with_forwards(p, q, K, w, k).value for k in strikes]
        assert np.all(np.diff(values) <= 1e-12)

    def test_convex_in_weights_and_strike(self):
        rng = np.random.default_rng(21)
        p, q, K, _ = random_feasible(rng, 4)
        for _ in range(200):
            w1, w2 = rng.uniform(0.2, 2.0, (2, 4))
            k1, k2 = rng.uniform(0.0, 12.0, 2)
            mid = upper_with_forwards(p, q, K, (w1 + w2) / 2, (k1 + k2) / 2).value
            avg = (
                upper_with_forwards(p, q, K, w1, k1).value
                + upper_with_forwards(p, q, K, w2, k2).value
            ) / 2
            assert mid <= avg + 1e-9


class TestUpperNoForwards:
    def test_single_asset_at_quoted_strike(self):
        res = upper_no_forwards([1.61], [7.0], [1.0], 7.0)
        assert res.value == pytest.approx(1.61, abs=1e-12)

    def test_golden_arithmetic(self, golden):
        p, _, K, w = golden
        res = upper_no_forwards(p, K, w, 3.84)
        assert res.value == pytest.approx(1.028 + (4.8 - 3.84), abs=1e-12)

    def test_zero_strikes_reduce_to_forward_sum(self):
        res = upper_no_forwards([1.0, 2.0], [0.0, 0.0], [1.0, 1.0], 0.5)
        assert res.value == pytest.approx(3.0, abs=1e-12)

    def test_dominates_forward_version(self, golden):
        p, q, K, w = golden
        rng = np.random.default_rng(3)
        for _ in range(20):
            k0 = float(rng.uniform(0.0, 8.0))
            with_f = upper_with_forwards(p, q, K, w, k0).value
            without = upper_no_forwards(p, K, w, k0).value
            assert with_f <= without + 1e-12


class TestSyntheticStrikes:
    def test_all_strikes_covered_means_price_sum(self):
        # w.K <= K0 forces t* = e and the bound w.p
        p, K, w = np.array([0.5, 0.7]), np.array([1.0, 2.0]), np.array([1.0, 1.0])
        q = np.array([1.2, 1.9])
        cert = synthetic_strikes(p, q, K, w, 4.0)
        np.testing.assert_allclose(cert.t_star, np.ones(2), atol=1e-9)
        assert cert.bound_value(w, 4.0) == pytest.approx(float(w @ p), abs=1e-9)

    def test_golden_value_matches_breakpoint_form(self, golden):
        p, q, K, w = golden
        cert = synthetic_strikes(p, q, K, w, 3.84)
        assert cert.bound_value(w, 3.84) == pytest.approx(1.71, abs=0.005)
        assert cert.beta_star == pytest.approx(0.714, abs=1e-9)
        closed = upper_with_forwards(p, q, K, w, 3.84).value
        assert cert.bound_value(w, 3.84) == pytest.approx(closed, abs=1e-8)

    def test_single_asset_zero_strike_is_forward(self):
        cert = synthetic_strikes([1.61], [7.0], [7.0], [1.0], 0.0)
        assert cert.bound_value([1.0], 0.0) == pytest.approx(7.0, abs=1e-9)

    def test_synthetic_quotes_reprice_the_bound(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(1, 5))
            p, q, K, w = random_feasible(rng, n)
            k0 = float(rng.uniform(0.0, 1.3) * (w @ q))
            cert = synthetic_strikes(p, q, K, w, k0)
            closed = upper_with_forwards(p, q, K, w, k0).value
            assert cert.bound_value(w, k0) == pytest.approx(closed, abs=1e-8)
            np.testing.assert_allclose(cert.synthetic_strikes, cert.t_star * K)
            np.testing.assert_allclose(
                cert.synthetic_prices, (1 - cert.t_star) * q + cert.t_star * p
            )


class TestTwoOptionReduction:
    def test_zero_lower_strike_is_identity(self):
        red = two_option_reduction(
            [0.0, 0.0], [2.0, 3.0], [1.0, 2.0], [1.5, 2.1], [1.0, 1.0], 1.7
        )
        np.testing.assert_allclose(red.q, [2.0, 3.0])
        np.testing.assert_allclose(red.p, [1.5, 2.1])
        np.testing.assert_allclose(red.strikes, [1.0, 2.0])
        assert red.strike0 == pytest.approx(1.7)

    def test_single_asset_worked_example(self):
        red = two_option_reduction([1.0], [1.0], [2.0], [0.4], [1.0], 2.0)
        assert red.q[0] == pytest.approx(1.0)
        assert red.p[0] == pytest.approx(0.4)
        assert red.strikes[0] == pytest.approx(1.0)
        assert red.strike0 == pytest.approx(1.0)

    def test_rejects_nonconvex_chain(self):
        # price rises between the two strikes
        with pytest.raises(ArbitrageError, match="clean it first"):
            two_option_reduction([1.0], [0.5], [2.0], [0.9], [1.0], 1.0)

    def test_bound_matches_grid_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(12):
            n = 2
            k1 = rng.uniform(0.2, 1.5, n)
            dk = rng.uniform(0.5, 2.0, n)
            k2 = k1 + dk
            p1 = rng.uniform(0.4, 2.0, n)
            slope = rng.uniform(-0.9, -0.1, n)
            p2 = np.maximum(p1 + slope * dk, 1e-2)
            w = rng.uniform(0.3, 1.5, n)
            k0 = float(rng.uniform(0.4, 1.2) * (w @ (p1 + k1)))
            red = two_option_reduction(k1, p1, k2, p2, w, k0)
            bound = upper_with_forwards(red.p, red.q, red.strikes, w, red.strike0)
            # oracle on the original two-option data; grid = reduced support + K1
            axes_reduced = upper_certificate_axes(
                red.p, red.q, red.strikes, red.strike0, bound.certificate.beta_star
            )
            axes = [np.unique(ax + k1[i]) for i, ax in enumerate(axes_reduced)]
            quotes = tuple(
                BasketQuote(np.eye(n)[i], k, pr)
                for i in range(n)
                for k, pr in ((k1[i], p1[i]), (k2[i], p2[i]))
            )
            market = MarketInstance(n=n, quotes=quotes)
            oracle = grid_oracle(market, w, k0, Sense.UPPER, axes)
            assert oracle.value == pytest.approx(bound.value, abs=1e-3)


class TestConvexChain:
    def test_from_quotes_prepends_anchor(self):
        chain = ConvexChain.from_quotes([1.0, 2.0], [1.0, 0.4])
        assert chain.strikes[0] == 0.0
        assert chain.prices[0] == pytest.approx(2.0)  # p1 + K1

    def test_interpolates_and_extends_flat(self):
        chain = ConvexChain.from_quotes([0.0, 7.0], [7.0, 1.61])
        assert chain.value(0.0) == pytest.approx(7.0)
        assert chain.value(7.0) == pytest.approx(1.61)
        assert chain.value(3.5) == pytest.approx((7.0 + 1.61) / 2)
        assert chain.value(20.0) == pytest.approx(1.61)  # constant tail

    def test_rejects_nonconvex_points(self):
        with pytest.raises(ArbitrageError):
            ConvexChain.from_quotes([1.0, 2.0, 3.0], [2.0, 0.5, 0.45])


class TestHobsonLambdaBound:
    def test_single_asset_interpolation(self):
        chain = ConvexChain.from_quotes([0.0, 7.0], [7.0, 1.61])
        res = hobson_lambda_bound([chain], [1.0], 3.5)
        assert res.value == pytest.approx(chain.value(3.5), abs=1e-9)

    def test_matches_breakpoint_bound_on_forward_plus_option(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            p, q, K, w = random_feasible(rng, n)
            k0 = float(rng.uniform(0.1, 1.2) * (w @ q))
            chains = [
                ConvexChain.from_quotes([0.0, K[i]], [q[i], p[i]]) for i in range(n)
            ]
            hob = hobson_lambda_bound(chains, w, k0)
            closed = upper_with_forwards(p, q, K, w, k0)
            assert hob.value == pytest.approx(closed.value, abs=1e-6)
            lam = hob.certificate.lam
            assert np.all(lam >= -1e-9) and lam.sum() == pytest.approx(1.0, abs=1e-9)

    def test_golden_strike(self, golden):
        p, q, K, w = golden
        chains = [ConvexChain.from_quotes([0.0, K[i]], [q[i], p[i]]) for i in range(5)]
        res = hobson_lambda_bound(chains, w, 4.32)
        assert res.value == pytest.approx(1.37, abs=0.005)


def _nu_certificate_lp_value(pw, gamma):
    """Independent value of min_nu sum_i (p_i w_i - nu_i gamma_i)+ on the simplex."""
    n = len(pw)
    rows, rels, rhs = [], [], []
    for i in range(n):
        row = np.zeros(2 * n)
        row[i] = -gamma[i]
        row[n + i] = -1.0
        rows.append(row)
        rels.append(LE)
        rhs.append(-pw[i])
    simplex = np.zeros(2 * n)
    simplex[:n] = 1.0
    rows.append(simplex)
    rels.append(EQ)
    rhs.append(1.0)
    sol = solve(
        LinearProgram(
            c=np.concatenate([np.zeros(n), np.ones(n)]),
            sense="min",
            a=np.asarray(rows),
            relations=rels,
            rhs=np.asarray(rhs),
            lower=np.zeros(2 * n),
        )
    )
    return float(sol.objective)


class TestLowerNoForwards:
    def test_all_strikes_inside_returns_price_sum(self):
        res = lower_no_forwards([0.5, 0.7], [3.0, 4.0], [1.0, 1.0], 2.5)
        assert res.value == pytest.approx(1.2, abs=1e-12)

    def test_single_asset_formula(self):
        # value = (p1 - (K0 - K1))+
        res = lower_no_forwards([0.9], [1.0], [1.0], 1.5)
        assert res.value == pytest.approx(0.4, abs=1e-12)
        res2 = lower_no_forwards([0.3], [1.0], [1.0], 1.5)
        assert res2.value == 0.0

    def test_matches_breakpoint_free_lp(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            n = int(rng.integers(1, 6))
            p = rng.uniform(0.01, 2.0, n)
            K = rng.uniform(0.1, 4.0, n)
            w = rng.uniform(0.2, 2.0, n)
            k0 = float(rng.uniform(0.1, 1.5) * (w @ K))
            res = lower_no_forwards(p, K, w, k0)
            lp_value = _nu_certificate_lp_value(p * w, np.maximum(k0 - K * w, 0.0))
            assert res.value == pytest.approx(lp_value, abs=1e-8)
            nu = res.certificate.nu
            assert np.all(nu >= -1e-12) and nu.sum() == pytest.approx(1.0, abs=1e-9)

    def test_matches_grid_oracle_on_seeded_grid(self):
        from basketbounds.distributions import lower_optimal_sequence

        rng = np.random.default_rng(77)
        for _ in range(10):
            n = 3
            p = rng.uniform(0.05, 1.5, n)
            K = rng.uniform(0.2, 3.0, n)
            w = rng.uniform(0.3, 1.5, n)
            k0 = float(rng.uniform(0.3, 1.2) * (w @ K))
            res = lower_no_forwards(p, K, w, k0)
            eps = 1e-6
            witness = lower_optimal_sequence(p, K, w, k0, res.certificate.nu, eps)
            axes = [
                np.unique(np.concatenate([[0.0, K[i]], witness.support[:, i]]))
                for i in range(n)
            ]
            market = MarketInstance(
                n=n,
                quotes=tuple(BasketQuote(np.eye(n)[i], K[i], p[i]) for i in range(n)),
            )
            oracle = grid_oracle(market, w, k0, Sense.LOWER, axes)
            assert res.value - 1e-9 <= oracle.value <= res.value + 1e-3

    def test_sandwich_against_upper(self, golden):
        p, q, K, w = golden
        for k0 in GOLDEN_STRIKES:
            lo = lower_no_forwards(p, K, w, k0).value
            hi = upper_no_forwards(p, K, w, k0).value
            assert lo <= hi + 1e-12
