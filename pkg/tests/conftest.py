import numpy as np
import pytest

from basketbounds.core import BasketQuote, MarketInstance


GOLDEN_P = np.array([1.61, 1.43, 0.93, 0.70, 0.47])
GOLDEN_Q = np.array([7.0, 5.0, 4.0, 4.0, 4.0])
GOLDEN_K = np.array([7.0, 5.0, 4.0, 4.0, 4.0])
GOLDEN_W = np.full(5, 0.2)
GOLDEN_STRIKES = (3.84, 4.32, 4.80, 5.28, 5.76)


@pytest.fixture
def golden():
    return GOLDEN_P.copy(), GOLDEN_Q.copy(), GOLDEN_K.copy(), GOLDEN_W.copy()


@pytest.fixture
def golden_market():
    quotes = tuple(
        BasketQuote(np.eye(5)[i], GOLDEN_K[i], GOLDEN_P[i]) for i in range(5)
    )
    return MarketInstance(n=5, forwards=GOLDEN_Q.copy(), quotes=quotes)


def random_feasible(rng, n, *, positive_prices=False):
    """(p, q, K, w) with 0 <= p < q <= p + K elementwise and w > 0."""
    q = rng.uniform(1.0, 10.0, n)
    K = rng.uniform(0.5, 10.0, n)
    beta = np.minimum(1.0, q / K) * rng.uniform(0.2, 0.98, n)
    p = q - beta * K
    if positive_prices:
        p = np.maximum(p, 1e-3)
        # shrinking beta can break q <= p + K only if beta exceeded q/K; it did not
    w = rng.uniform(0.2, 2.0, n)
    assert np.all(p >= 0) and np.all(p < q) and np.all(q <= p + K + 1e-12)
    return p, q, K, w


def market_from_vectors(p, q, K):
    n = len(p)
    quotes = tuple(BasketQuote(np.eye(n)[i], K[i], p[i]) for i in range(n))
    return MarketInstance(n=n, forwards=np.asarray(q, dtype=float), quotes=quotes)
