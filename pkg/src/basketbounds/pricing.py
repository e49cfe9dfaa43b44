"""Reference lognormal pricing: Black call values, implied volatilities, and
Monte Carlo basket prices used to manufacture demo market data."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

_VOL_LO, _VOL_HI = 1e-6, 5.0
_BLOCK_PAIRS = 1 << 15  # antithetic pairs per stream


@dataclass(frozen=True)
class LognormalMarket:
    """Forwards, annualized log-return covariance, and maturity in years.

    The covariance must be symmetric; eigenvalues down to -1e-10 are clipped
    to zero (with a warning) so data transcribed from print never crashes.
    """

    forwards: np.ndarray
    covariance: np.ndarray
    maturity: float

    def __post_init__(self):
        f = np.asarray(self.forwards, dtype=float)
        c = np.asarray(self.covariance, dtype=float)
        if f.ndim != 1 or np.any(f <= 0):
            raise ValueError("forwards must be a positive vector")
        n = f.shape[0]
        if c.shape != (n, n):
            raise ValueError("covariance must be n x n")
        if np.max(np.abs(c - c.T)) > 1e-12:
            raise ValueError("covariance must be symmetric")
        if self.maturity <= 0:
            raise ValueError("maturity must be positive")
        eigvals, eigvecs = np.linalg.eigh(c)
        # tolerate mild indefiniteness typical of covariances transcribed from
        # print: clip anything above -1% of the top eigenvalue, reject worse
        clip_floor = -1e-2 * max(float(eigvals.max()), 1e-30)
        if eigvals.min() < clip_floor:
            raise ValueError(
                f"covariance is not positive semidefinite (min eig {eigvals.min():.3e})"
            )
        if eigvals.min() < 0:
            warnings.warn(
                f"clipping slightly negative covariance eigenvalue {eigvals.min():.3e}",
                stacklevel=2,
            )
        factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
        f.setflags(write=False)
        c.setflags(write=False)
        factor.setflags(write=False)
        object.__setattr__(self, "forwards", f)
        object.__setattr__(self, "covariance", c)
        object.__setattr__(self, "maturity", float(self.maturity))
        object.__setattr__(self, "_factor", factor)

    @property
    def n(self) -> int:
        return self.forwards.shape[0]


def black_call(forward: float, strike: float, vol: float, maturity: float) -> float:
    """Undiscounted Black call value; a zero strike returns the forward."""
    f, k, v, t = float(forward), float(strike), float(vol), float(maturity)
    if f <= 0 or v <= 0 or t <= 0:
        raise ValueError("forward, vol and maturity must be positive")
    if k < 0:
        raise ValueError("strike must be non-negative")
    if k == 0.0:
        return f
    stdev = v * np.sqrt(t)
    d1 = np.log(f / k) / stdev + 0.5 * stdev
    d2 = d1 - stdev
    return float(f * norm.cdf(d1) - k * norm.cdf(d2))


def implied_vol(price: float, forward: float, strike: float, maturity: float) -> float:
    """Black volatility reproducing ``price`` to within 1e-10.

    The price must lie strictly inside the arbitrage-free interval
    ((F - K)+, F); a safeguarded bisection/Newton search runs on
    [1e-6, 5.0] volatility.
    """
    f, k, t = float(forward), float(strike), float(maturity)
    target = float(price)
    intrinsic = max(f - k, 0.0)
    if target <= intrinsic:
        raise ValueError(
            f"price {target:g} at lower arbitrage boundary (intrinsic {intrinsic:g})"
        )
    if target >= f:
        raise ValueError(f"price {target:g} at upper arbitrage boundary (forward {f:g})")
    lo, hi = _VOL_LO, _VOL_HI
    if black_call(f, k, hi, t) < target:
        raise ValueError(f"implied volatility above the search cap {_VOL_HI}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        diff = black_call(f, k, mid, t) - target
        if abs(diff) <= 1e-12:
            lo = hi = mid
            break
        if diff < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    vol = 0.5 * (lo + hi)
    # Newton polish for the price-residual contract
    for _ in range(8):
        diff = black_call(f, k, vol, t) - target
        if abs(diff) <= 1e-10:
            break
        stdev = vol * np.sqrt(t)
        d1 = np.log(f / k) / stdev + 0.5 * stdev
        vega = f * norm.pdf(d1) * np.sqrt(t)
        if vega <= 0:
            break
        vol = min(max(vol - diff / vega, _VOL_LO), _VOL_HI)
    return float(vol)


def simulate_terminal(mkt: LognormalMarket, pairs: int, seed, stream: int) -> np.ndarray:
    """One antithetic block of terminal prices, shape (2 * pairs, n).

    The stream index seeds an independent generator, so a fixed (seed, stream)
    pair always yields the same block regardless of how work is partitioned.
    """
    rng = np.random.default_rng([int(seed), int(stream)])
    z = rng.standard_normal((pairs, mkt.n))
    z = np.vstack([z, -z])
    t = mkt.maturity
    # drift from the factor diagonal, not the raw covariance, so the forwards
    # stay martingales even after eigenvalue clipping
    drift = -0.5 * (mkt._factor**2).sum(axis=1) * t
    shock = np.sqrt(t) * (z @ mkt._factor.T)
    return mkt.forwards * np.exp(drift + shock)


def mc_prices(mkt: LognormalMarket, contracts, paths: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo prices for many (weights, strike) contracts on shared paths.

    Antithetic variates are always on; standard errors treat each antithetic
    pair average as one observation.  Returns (prices, standard_errors).
    """
    if paths < 10_000:
        raise ValueError("need at least 10000 paths")
    wk = [(np.asarray(w, dtype=float), float(k)) for w, k in contracts]
    pairs_total = (paths + 1) // 2
    sums = np.zeros(len(wk))
    sq_sums = np.zeros(len(wk))
    done = 0
    stream = 0
    while done < pairs_total:
        block = min(_BLOCK_PAIRS, pairs_total - done)
        x = simulate_terminal(mkt, block, seed, stream)
        for j, (w, k) in enumerate(wk):
            pay = np.maximum(x @ w - k, 0.0)
            pair_mean = 0.5 * (pay[:block] + pay[block:])
            sums[j] += pair_mean.sum()
            sq_sums[j] += (pair_mean**2).sum()
        done += block
        stream += 1
    mean = sums / pairs_total
    var = np.maximum(sq_sums / pairs_total - mean**2, 0.0)
    stderr = np.sqrt(var / pairs_total)
    return mean, stderr


def mc_basket_price(mkt: LognormalMarket, weights, strike, paths: int, seed) -> tuple[float, float]:
    """Monte Carlo basket call price and standard error; deterministic per seed."""
    prices, errs = mc_prices(mkt, [(weights, strike)], paths, seed)
    return float(prices[0]), float(errs[0])


def yield_curve_demo() -> tuple[LognormalMarket, np.ndarray, np.ndarray]:
    """Bundled five-rate demo: forwards, covariance, target weights, and the
    cumulative weight rows quoted at the money."""
    forwards = np.array([0.03, 0.04, 0.04, 0.05, 0.05])
    covariance = np.array(
        [
            [0.034, 0.032, 0.026, 0.021, 0.018],
            [0.032, 0.035, 0.019, 0.026, 0.011],
            [0.026, 0.019, 0.024, 0.010, 0.019],
            [0.021, 0.026, 0.010, 0.020, 0.004],
            [0.018, 0.011, 0.019, 0.004, 0.017],
        ]
    )
    target_weights = np.array([0.2, 0.1, 0.2, 0.1, 0.2])
    quote_rows = np.tril(np.ones((5, 5)))
    market = LognormalMarket(forwards=forwards, covariance=covariance, maturity=1.0)
    return market, target_weights, quote_rows
