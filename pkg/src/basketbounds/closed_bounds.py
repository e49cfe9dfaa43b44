"""Closed-form and small-LP price bounds for single-asset constraint data.

Covers the breakpoint upper bound given forwards plus one option per asset,
the Jensen upper bound without forwards, the synthetic-strike LP rewrite of
the upper bound, the reduction of two-options-per-asset data to the
forward-plus-one-option case, the simplex bound over convex chains, and the
closed-form lower bound without forwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ArbitrageError,
    BoundResult,
    FeasibilityError,
    Method,
    Sense,
    SolverFailure,
    chain_violations,
    feasibility_violations,
)
from .lp_backend import EQ, LE, LinearProgram, LpStatus, solve


@dataclass(frozen=True)
class BreakpointCertificate:
    """Argmax breakpoint of the one-dimensional concave upper-bound objective."""

    beta_star: float


@dataclass(frozen=True)
class UpperCertificate:
    """Synthetic per-asset option equivalent to forward-plus-option data.

    The bound is recovered from the blend t* via
    ``w . p_hat + (w . K_hat - K0)_+``.
    """

    beta_star: float
    t_star: np.ndarray
    synthetic_strikes: np.ndarray  # t* K
    synthetic_prices: np.ndarray  # (e - t*) q + t* p

    def bound_value(self, w, strike: float) -> float:
        w = np.asarray(w, dtype=float)
        return float(
            w @ self.synthetic_prices
            + max(w @ self.synthetic_strikes - strike, 0.0)
        )


@dataclass(frozen=True)
class HobsonCertificate:
    """Optimal simplex weights of the per-asset chain decomposition."""

    lam: np.ndarray


@dataclass(frozen=True)
class LowerNoForwardCertificate:
    """Optimal simplex vector of the no-forward lower-bound dual."""

    nu: np.ndarray


@dataclass(frozen=True)
class ReducedInstance:
    """Forward-plus-one-option instance equivalent to two options per asset."""

    p: np.ndarray
    q: np.ndarray
    strikes: np.ndarray
    strike0: float


class ConvexChain:
    """Largest decreasing convex piecewise-affine function through call quotes.

    Stores the points (0, c0), (K_1, p_1), ..., (K_J, p_J) and evaluates as the
    maximum of the chord pieces plus a constant tail at the last price, which
    is the largest decreasing convex extension beyond the quoted range.
    """

    def __init__(self, strikes, prices):
        ks = np.asarray(strikes, dtype=float)
        ps = np.asarray(prices, dtype=float)
        if ks.ndim != 1 or ks.shape != ps.shape or ks.shape[0] < 2:
            raise ValueError("need at least two (strike, price) points")
        if ks[0] != 0.0:
            raise ValueError("chain must start at strike 0; use from_quotes")
        bad = chain_violations(ks, ps)
        if bad:
            raise ArbitrageError(
                "non-convex chain; clean it first: " + "; ".join(str(v) for v in bad)
            )
        self.strikes = ks.copy()
        self.prices = ps.copy()
        slopes = np.diff(ps) / np.diff(ks)
        intercepts = ps[:-1] - slopes * ks[:-1]
        # constant tail keeps the maximal decreasing convex extension
        self._piece_slopes = np.append(slopes, 0.0)
        self._piece_intercepts = np.append(intercepts, ps[-1])

    @classmethod
    def from_quotes(cls, strikes, prices) -> "ConvexChain":
        """Build from quoted (K_j, p_j); when no strike-0 point is quoted, the
        anchor (0, p_1 + K_1) is prepended (the largest consistent forward)."""
        ks = np.asarray(strikes, dtype=float)
        ps = np.asarray(prices, dtype=float)
        order = np.argsort(ks)
        ks, ps = ks[order], ps[order]
        if ks.shape[0] == 0:
            raise ValueError("empty chain")
        if ks[0] > 0.0:
            ks = np.insert(ks, 0, 0.0)
            ps = np.insert(ps, 0, ps[0] + ks[1])
        return cls(ks, ps)

    def pieces(self) -> tuple[np.ndarray, np.ndarray]:
        """(slopes, intercepts) of the affine pieces; value(k) is their max."""
        return self._piece_slopes.copy(), self._piece_intercepts.copy()

    def value(self, k) -> float:
        k = float(k)
        if k < 0:
            raise ValueError("strike must be non-negative")
        return float(np.max(self._piece_slopes * k + self._piece_intercepts))


def _prepare(p, q, strikes, w, strike0) -> tuple[np.ndarray, ...]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (p.shape == q.shape == ks.shape == w.shape):
        raise ValueError("p, q, K, w must share one shape")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    bad = feasibility_violations(p, q, ks)
    if bad:
        raise FeasibilityError(bad)
    return p, q, ks, w, float(strike0)


def _breakpoints(p, q, strikes) -> np.ndarray:
    betas = [0.0, 1.0]
    pos = strikes > 0
    betas.extend(np.clip((q[pos] - p[pos]) / strikes[pos], 0.0, 1.0))
    return np.unique(np.asarray(betas))


def upper_with_forwards(p, q, strikes, w, strike0) -> BoundResult:
    """Upper bound given forwards q and one option (K_i, p_i) per asset.

    The objective w.p + sum_i w_i min(q_i - p_i, beta K_i) - beta K0 is
    concave piecewise-linear in beta, so the maximum over [0, 1] is attained
    at a breakpoint (q_j - p_j)/K_j or at 0 or 1; ties resolve to the
    smallest beta for determinism.
    """
    p, q, ks, w, k0 = _prepare(p, q, strikes, w, strike0)
    best_val, best_beta = -np.inf, 0.0
    for beta in _breakpoints(p, q, ks):
        val = float(w @ p + w @ np.minimum(q - p, beta * ks) - beta * k0)
        if val > best_val + 0.0:
            best_val, best_beta = val, float(beta)
    return BoundResult(
        value=best_val,
        sense=Sense.UPPER,
        method=Method.CLOSED_UPPER,
        certificate=BreakpointCertificate(beta_star=best_beta),
    )


def upper_no_forwards(p, strikes, w, strike0) -> BoundResult:
    """Jensen upper bound w.p + (w.K - K0)_+ when no forwards are quoted."""
    p = np.asarray(p, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    if np.any(p < 0) or np.any(ks < 0):
        raise ValueError("prices and strikes must be non-negative")
    value = float(w @ p + max(w @ ks - float(strike0), 0.0))
    return BoundResult(
        value=value,
        sense=Sense.UPPER,
        method=Method.JENSEN_UPPER,
        certificate=None,
    )


def synthetic_strikes(p, q, strikes, w, strike0) -> UpperCertificate:
    """Blend t* in [0,1]^n minimizing w.((e-t)q + tp) + (w.(t K) - K0)_+.

    Solved as an LP with one auxiliary variable for the positive part; the
    resulting synthetic quotes (K_hat, p_hat) price the upper bound through
    ``bound_value`` and match ``upper_with_forwards``.
    """
    p, q, ks, w, k0 = _prepare(p, q, strikes, w, strike0)
    n = p.shape[0]
    # vars: t (n), u (1); min w.q - sum_i t_i w_i (q_i - p_i) + u
    c = np.concatenate([-w * (q - p), [1.0]])
    a = np.zeros((1, n + 1))
    a[0, :n] = w * ks
    a[0, n] = -1.0
    lp = LinearProgram(
        c=c,
        sense="min",
        a=a,
        relations=[LE],
        rhs=np.array([k0]),
        lower=np.zeros(n + 1),
        upper=np.append(np.ones(n), np.inf),
    )
    sol = solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"synthetic-strike LP failed: {sol.status.value}")
    t_star = np.clip(sol.x[:n], 0.0, 1.0)
    beta_star = upper_with_forwards(p, q, ks, w, k0).certificate.beta_star
    return UpperCertificate(
        beta_star=beta_star,
        t_star=t_star,
        synthetic_strikes=t_star * ks,
        synthetic_prices=(1.0 - t_star) * q + t_star * p,
    )


def two_option_reduction(strikes1, p1, strikes2, p2, w, strike0) -> ReducedInstance:
    """Rewrite two option quotes per asset as forwards plus one option.

    With K2 > K1 >= 0 and per-asset prices lying on a decreasing convex chain,
    the substitution x = K1 + y maps the data to q' = p1, p' = p2,
    K' = K2 - K1 and K0' = K0 - w.K1; the upper bound of the original problem
    is ``upper_with_forwards`` on the reduction (valid for negative K0' too,
    where the payoff is linear).
    """
    k1 = np.asarray(strikes1, dtype=float)
    k2 = np.asarray(strikes2, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (k1.shape == k2.shape == p1.shape == p2.shape == w.shape):
        raise ValueError("all inputs must share one shape")
    if np.any(k1 < 0) or np.any(k2 <= k1):
        raise ValueError("need K2 > K1 >= 0 elementwise")
    for i in range(k1.shape[0]):
        bad = chain_violations(
            [0.0, k1[i], k2[i]], [p1[i] + k1[i], p1[i], p2[i]], asset=i
        )
        if bad:
            raise ArbitrageError(
                "non-convex chain; clean it first: " + "; ".join(str(v) for v in bad)
            )
    return ReducedInstance(
        p=p2.copy(),
        q=p1.copy(),
        strikes=k2 - k1,
        strike0=float(strike0) - float(w @ k1),
    )


def hobson_lambda_bound(chains, w, strike0) -> BoundResult:
    """Upper bound min over the simplex of sum_i w_i C_i(lambda_i K0 / w_i).

    Each chain value is convex piecewise-affine, so the problem is solved as
    an LP in epigraph form with one constraint per affine piece.
    """
    w = np.asarray(w, dtype=float)
    k0 = float(strike0)
    n = w.shape[0]
    if len(chains) != n:
        raise ValueError("need one chain per weight entry")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    # vars: lam (n), s (n); min sum s
    rows, rels, rhs = [], [], []
    for i, chain in enumerate(chains):
        slopes, intercepts = chain.pieces()
        for a_k, b_k in zip(slopes, intercepts):
            # s_i >= w_i * (a_k * lam_i K0 / w_i + b_k)
            row = np.zeros(2 * n)
            row[i] = a_k * k0
            row[n + i] = -1.0
            rows.append(row)
            rels.append(LE)
            rhs.append(-w[i] * b_k)
    simplex = np.zeros(2 * n)
    simplex[:n] = 1.0
    rows.append(simplex)
    rels.append(EQ)
    rhs.append(1.0)
    lp = LinearProgram(
        c=np.concatenate([np.zeros(n), np.ones(n)]),
        sense="min",
        a=np.asarray(rows),
        relations=rels,
        rhs=np.asarray(rhs),
        lower=np.concatenate([np.zeros(n), np.full(n, -np.inf)]),
        upper=np.full(2 * n, np.inf),
    )
    sol = solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"simplex chain LP failed: {sol.status.value}")
    return BoundResult(
        value=float(sol.objective),
        sense=Sense.UPPER,
        method=Method.HOBSON_LAMBDA,
        certificate=HobsonCertificate(lam=sol.x[:n].copy()),
    )


def lower_no_forwards(p, strikes, w, strike0) -> BoundResult:
    """Closed-form lower bound when only option prices are quoted.

    Assets with K_i w_i >= K0 contribute p_i w_i outright; the rest enter a
    one-dimensional breakpoint search whose value is taken at zero when the
    index set is empty.  The certificate is the optimal simplex vector nu of
    the equivalent dual program min_nu sum_i (p_i w_i - nu_i (K0 - K_i w_i)+)+,
    recovered by a tiny LP.
    """
    p = np.asarray(p, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    if np.any(p < 0) or np.any(ks < 0):
        raise ValueError("prices and strikes must be non-negative")
    k0 = float(strike0)
    if k0 < 0:
        raise ValueError("target strike must be non-negative")
    n = p.shape[0]
    pw = p * w
    gamma = np.maximum(k0 - ks * w, 0.0)
    inside = gamma == 0.0  # K_i w_i >= K0
    base = float(pw[inside].sum())
    tail = 0.0
    outs = np.nonzero(~inside)[0]
    for j in outs:
        v = gamma[j]
        val = float(pw[outs] @ np.minimum(1.0, v / gamma[outs]) - v)
        tail = max(tail, val)
    value = base + tail

    # nu certificate: min sum z, z_i >= p_i w_i - nu_i gamma_i, z >= 0, nu on simplex
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
    lp = LinearProgram(
        c=np.concatenate([np.zeros(n), np.ones(n)]),
        sense="min",
        a=np.asarray(rows),
        relations=rels,
        rhs=np.asarray(rhs),
        lower=np.zeros(2 * n),
        upper=np.full(2 * n, np.inf),
    )
    sol = solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"lower-bound dual LP failed: {sol.status.value}")
    return BoundResult(
        value=value,
        sense=Sense.LOWER,
        method=Method.LOWER_CLOSED_NO_FORWARD,
        certificate=LowerNoForwardCertificate(nu=sol.x[:n].copy()),
    )
