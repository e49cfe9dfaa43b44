import numpy as np
import pytest

from basketbounds.closed_bounds import lower_no_forwards
from basketbounds.core import FeasibilityError
from basketbounds.distributions import feasible_comonotone, price_under
from basketbounds.lower_lp import lower_with_forwards

from conftest import random_feasible

# An exact 10-point pricing measure for the golden five-asset data whose
# basket payoff at strike 4.80 is identically zero: every support point sums
# to 24, so 0.2 * sum(x) never exceeds 4.80.  Probabilities are exact
# rationals; the measure reprices all forwards and options exactly, which
# pins the minimal basket price at 4.80 to zero.
_ZERO_PRICE_SUPPORT = np.array(
    [
        [0.0, 10.0, 4.0, 8.0, 2.0],
        [0.0, 10.0, 8.0, 4.0, 2.0],
        [3.5, 2.5, 12.0, 2.0, 4.0],
        [3.5, 12.5, 2.0, 4.0, 2.0],
        [3.5, 12.5, 4.0, 2.0, 2.0],
        [7.0, 5.0, 0.0, 8.0, 4.0],
        [7.0, 5.0, 2.0, 4.0, 6.0],
        [7.0, 5.0, 4.0, 4.0, 4.0],
        [7.0, 5.0, 4.0, 6.0, 2.0],
        [14.0, 0.0, 4.0, 2.0, 4.0],
    ]
)
_ZERO_PRICE_PROBS = np.array(
    [219 / 2000, 17 / 2000, 14 / 125, 13 / 125, 1 / 125, 63 / 1000, 47 / 200, 1 / 8, 1 / 200, 23 / 100]
)


class TestGoldenRow:
    def test_intrinsic_strikes(self, golden):
        p, q, K, w = golden
        assert lower_with_forwards(p, q, K, w, 3.84).value == pytest.approx(0.96, abs=0.005)
        assert lower_with_forwards(p, q, K, w, 4.32).value == pytest.approx(0.48, abs=0.005)

    def test_far_strikes_zero(self, golden):
        p, q, K, w = golden
        assert lower_with_forwards(p, q, K, w, 5.28).value == pytest.approx(0.0, abs=0.005)
        assert lower_with_forwards(p, q, K, w, 5.76).value == pytest.approx(0.0, abs=0.005)

    def test_zero_strike_is_basket_forward(self, golden):
        p, q, K, w = golden
        assert lower_with_forwards(p, q, K, w, 0.0).value == pytest.approx(
            float(w @ q), abs=1e-8
        )


class TestAtTheMoneyStrike:
    """At strike 4.80 an exact feasible measure prices the basket at zero, so
    zero is the best possible lower bound there (the golden table's printed
    0.09 for this cell is not achievable by any valid method)."""

    def test_zero_price_measure_is_feasible(self, golden):
        p, q, K, _ = golden
        assert _ZERO_PRICE_PROBS.sum() == pytest.approx(1.0, abs=1e-15)
        for i in range(5):
            mean = _ZERO_PRICE_PROBS @ _ZERO_PRICE_SUPPORT[:, i]
            call = _ZERO_PRICE_PROBS @ np.maximum(_ZERO_PRICE_SUPPORT[:, i] - K[i], 0.0)
            assert mean == pytest.approx(q[i], abs=1e-12)
            assert call == pytest.approx(p[i], abs=1e-12)

    def test_zero_price_measure_has_zero_payoff(self, golden):
        _, _, _, w = golden
        payoff = _ZERO_PRICE_PROBS @ np.maximum(_ZERO_PRICE_SUPPORT @ w - 4.80, 0.0)
        assert payoff == 0.0

    def test_lower_bound_is_zero(self, golden):
        p, q, K, w = golden
        assert lower_with_forwards(p, q, K, w, 4.80).value == pytest.approx(0.0, abs=1e-8)


class TestCertificate:
    def test_constraints_and_objective(self, golden):
        p, q, K, w = golden
        for k0 in (3.84, 4.32, 4.80):
            res = lower_with_forwards(p, q, K, w, k0)
            cert = res.certificate
            assert np.all(cert.lam + cert.mu <= w + 1e-8)
            assert np.all(cert.alpha >= -1e-9) and np.all(cert.alpha <= 1 + 1e-9)
            pos = np.maximum(cert.lam + cert.mu, 0.0)
            assert np.all(pos / w <= cert.alpha[1:] + 1e-8)
            objective = cert.lam @ p + cert.mu @ (q - K) + cert.h
            assert objective == pytest.approx(res.value, abs=1e-8)


class TestDominanceAndDuality:
    def test_dominates_no_forward_bound(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            p, q, K, w = random_feasible(rng, n, positive_prices=True)
            k0 = float(rng.uniform(0.1, 1.4) * (w @ q))
            with_f = lower_with_forwards(p, q, K, w, k0).value
            without = lower_no_forwards(p, K, w, k0).value
            assert with_f >= without - 1e-8

    def test_dominates_intrinsic(self):
        rng = np.random.default_rng(43)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            p, q, K, w = random_feasible(rng, n)
            k0 = float(rng.uniform(0.0, 1.4) * (w @ q))
            value = lower_with_forwards(p, q, K, w, k0).value
            assert value >= max(0.0, float(w @ q) - k0) - 1e-8

    def test_weak_duality_against_comonotone_witness(self):
        rng = np.random.default_rng(47)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            p, q, K, w = random_feasible(rng, n)
            k0 = float(rng.uniform(0.0, 1.4) * (w @ q))
            value = lower_with_forwards(p, q, K, w, k0).value
            witness = feasible_comonotone(p, q, K)
            assert value <= price_under(witness, w, k0) + 1e-8

    def test_rejects_infeasible_market(self):
        with pytest.raises(FeasibilityError):
            lower_with_forwards([3.0], [2.0], [1.0], [1.0], 1.0)
