"""Domain types, payoff evaluation, and market-data feasibility checks.

Everything here is immutable after construction and all functions are pure,
so concurrent use needs no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence

import numpy as np

# Slack applied to the strict single-asset feasibility checks so that data
# sitting at a boundary because of rounding is not rejected.
FEASIBILITY_TOL = 1e-12


class Sense(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class Method(str, Enum):
    CLOSED_UPPER = "ClosedUpper"
    JENSEN_UPPER = "JensenUpper"
    LOWER_LP = "LowerLP"
    LOWER_CLOSED_NO_FORWARD = "LowerClosedNoForward"
    RELAX_LP = "RelaxLP"
    HOBSON_LAMBDA = "HobsonLambda"
    ORACLE_GRID = "OracleGrid"


class ArbitrageError(ValueError):
    """Input quotes admit a static arbitrage (or are mutually inconsistent)."""


class FeasibilityError(ValueError):
    """Market data violates the single-asset feasibility conditions."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class SolverFailure(RuntimeError):
    """An LP backend reported a numerical failure."""


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Violation:
    """One violated no-arbitrage inequality, tied to an asset when applicable."""

    asset: Optional[int]
    inequality: str
    detail: str

    def __str__(self) -> str:
        where = f"asset {self.asset}: " if self.asset is not None else ""
        return f"{where}{self.inequality} fails ({self.detail})"


@dataclass(frozen=True)
class BasketQuote:
    """Observed price of one basket call: weights w >= 0, strike K >= 0, price p.

    A forward quote is a strike-0 call (its price equals w . q).  ``price`` is
    None for target quotes whose price is the unknown being bounded.
    """

    weights: np.ndarray
    strike: float
    price: Optional[float] = None

    def __post_init__(self):
        w = _readonly(self.weights)
        if w.ndim != 1:
            raise ValueError("weights must be a 1-d vector")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "strike", float(self.strike))
        if self.strike < 0:
            raise ValueError("strike must be non-negative")
        if self.price is not None:
            object.__setattr__(self, "price", float(self.price))
            if self.price < 0:
                raise ValueError("price must be non-negative")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def single_asset_index(self) -> Optional[int]:
        """Index i when weights is a positive multiple of the i-th unit vector."""
        nz = np.nonzero(self.weights)[0]
        if nz.shape[0] == 1 and self.weights[nz[0]] > 0:
            return int(nz[0])
        return None


@dataclass(frozen=True)
class MarketInstance:
    """Forwards plus a set of basket quotes, optionally with per-asset chains.

    ``single_asset_chains`` is a per-asset list of (strike, price) pairs with
    strictly increasing strikes; assets without a chain hold an empty list.
    """

    n: int
    forwards: Optional[np.ndarray] = None
    quotes: tuple = ()
    single_asset_chains: Optional[tuple] = None

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("asset count must be positive")
        if self.forwards is not None:
            q = _readonly(self.forwards)
            if q.shape != (self.n,):
                raise ValueError(f"forwards must have length {self.n}")
            if np.any(q < 0):
                raise ValueError("forwards must be non-negative")
            object.__setattr__(self, "forwards", q)
        quotes = tuple(self.quotes)
        for quote in quotes:
            if quote.n != self.n:
                raise ValueError("quote weight length does not match asset count")
            if quote.price is None:
                raise ValueError("market quotes must carry a price")
        object.__setattr__(self, "quotes", quotes)
        if self.single_asset_chains is not None:
            chains = []
            if len(self.single_asset_chains) != self.n:
                raise ValueError(f"need one chain entry per asset ({self.n})")
            for chain in self.single_asset_chains:
                pairs = tuple((float(k), float(p)) for k, p in chain)
                strikes = [k for k, _ in pairs]
                if any(b <= a for a, b in zip(strikes, strikes[1:])):
                    raise ValueError("chain strikes must be strictly increasing")
                if any(p < 0 for _, p in pairs):
                    raise ValueError("chain prices must be non-negative")
                chains.append(pairs)
            object.__setattr__(self, "single_asset_chains", tuple(chains))


@dataclass(frozen=True)
class BoundProblem:
    """A bound request: market data, a target quote with unset price, a sense."""

    market: MarketInstance
    target: BasketQuote
    sense: Sense

    def __post_init__(self):
        if self.target.n != self.market.n:
            raise ValueError("target weight length does not match market")
        if self.target.price is not None:
            raise ValueError("target price must be unset")


@dataclass(frozen=True)
class BoundResult:
    """A bound value with its sense, producing method, and certificate payload."""

    value: float
    sense: Sense
    method: Method
    certificate: Any = None


def payoff(weights, strike, x) -> float:
    """European basket call payoff max(w . x - K, 0)."""
    w = np.asarray(weights, dtype=float)
    xs = np.asarray(x, dtype=float)
    if w.shape != xs.shape:
        raise ValueError(f"dimension mismatch: weights {w.shape} vs prices {xs.shape}")
    return float(max(np.dot(w, xs) - float(strike), 0.0))


def validate(market: MarketInstance) -> list[Violation]:
    """Check 0 <= p < q <= p + K for every single-asset (quote, forward) pair.

    Violations are returned as data, never raised.  The list is empty when no
    forwards are present or every pair satisfies the inequalities (within
    FEASIBILITY_TOL on normalized prices).
    """
    violations: list[Violation] = []
    if market.forwards is None:
        return violations
    for quote in market.quotes:
        i = quote.single_asset_index()
        if i is None:
            continue
        scale = quote.weights[i]
        p = quote.price / scale
        strike = quote.strike / scale
        q = float(market.forwards[i])
        tol = FEASIBILITY_TOL * max(1.0, abs(q))
        if p < -tol:
            violations.append(Violation(i, "0 <= p", f"p={p:.6g}"))
        if p - q > tol:
            violations.append(Violation(i, "p < q", f"p={p:.6g}, q={q:.6g}"))
        if q - (p + strike) > tol:
            violations.append(
                Violation(i, "q <= p+K", f"q={q:.6g}, p+K={p + strike:.6g}")
            )
    return violations


def feasibility_violations(p, q, strikes) -> list[Violation]:
    """Vector form of the single-asset checks 0 <= p < q <= p + K."""
    ps = np.asarray(p, dtype=float)
    qs = np.asarray(q, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    out: list[Violation] = []
    for i in range(ps.shape[0]):
        tol = FEASIBILITY_TOL * max(1.0, abs(qs[i]))
        if ps[i] < -tol:
            out.append(Violation(i, "0 <= p", f"p={ps[i]:.6g}"))
        if ps[i] - qs[i] > tol:
            out.append(Violation(i, "p < q", f"p={ps[i]:.6g}, q={qs[i]:.6g}"))
        if qs[i] - (ps[i] + ks[i]) > tol:
            out.append(Violation(i, "q <= p+K", f"q={qs[i]:.6g}, p+K={ps[i] + ks[i]:.6g}"))
    return out


def chain_violations(strikes, prices, asset: Optional[int] = None) -> list[Violation]:
    """Static-arbitrage checks on one call chain: prices non-negative and
    non-increasing, slopes within [-1, 0] and non-decreasing (convexity)."""
    ks = np.asarray(strikes, dtype=float)
    ps = np.asarray(prices, dtype=float)
    if ks.shape != ps.shape or ks.ndim != 1:
        raise ValueError("strikes and prices must be 1-d vectors of equal length")
    scale = max(1.0, float(np.max(np.abs(ps), initial=0.0)))
    tol = 1e-9 * scale
    out: list[Violation] = []
    for j, p in enumerate(ps):
        if p < -tol:
            out.append(Violation(asset, "price >= 0", f"strike {ks[j]:g}: {p:.6g}"))
    slopes = np.diff(ps) / np.diff(ks)
    for j, s in enumerate(slopes):
        if s > tol:
            out.append(
                Violation(
                    asset,
                    "decreasing in strike",
                    f"slope {s:.6g} on [{ks[j]:g}, {ks[j + 1]:g}]",
                )
            )
        if s < -1.0 - tol:
            out.append(
                Violation(
                    asset,
                    "slope >= -1",
                    f"slope {s:.6g} on [{ks[j]:g}, {ks[j + 1]:g}]",
                )
            )
    for j in range(len(slopes) - 1):
        if slopes[j + 1] < slopes[j] - tol:
            out.append(
                Violation(
                    asset,
                    "convex in strike",
                    f"slope drops {slopes[j]:.6g} -> {slopes[j + 1]:.6g} "
                    f"after strike {ks[j + 1]:g}",
                )
            )
    return out


def per_asset_option_data(market: MarketInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extract (p, q, K) vectors for markets quoting one option per asset.

    Each asset must carry exactly one single-asset quote (weights a positive
    multiple of a unit vector; strike and price are normalized by the weight)
    and the market must have forwards.
    """
    if market.forwards is None:
        raise ValueError("market has no forward prices")
    p = np.full(market.n, np.nan)
    strikes = np.full(market.n, np.nan)
    for quote in market.quotes:
        i = quote.single_asset_index()
        if i is None:
            continue
        if not np.isnan(p[i]):
            raise ValueError(f"asset {i} has more than one single-asset quote")
        scale = quote.weights[i]
        p[i] = quote.price / scale
        strikes[i] = quote.strike / scale
    if np.any(np.isnan(p)):
        missing = [int(i) for i in np.nonzero(np.isnan(p))[0]]
        raise ValueError(f"assets without a single-asset quote: {missing}")
    return p, np.asarray(market.forwards, dtype=float).copy(), strikes
