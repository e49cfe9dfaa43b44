"""Piecewise-affine LP relaxation of the basket call-price surface.

A candidate price surface C(w, K) is constrained to be jointly convex,
positively homogeneous of degree one, non-decreasing in the weights and with
strike slope in [-1, 0], while interpolating the quoted prices (and, when
forwards are present, the zero-strike anchors C(w_i, 0) = w_i . q).  Those
shape conditions hold for every arbitrage-free surface, so maximizing
(minimizing) the target value over the anchor subgradients yields an upper
(lower) bound on any consistent price.  The same machinery in dimension one
gives the l1 chain repair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ArbitrageError,
    BoundResult,
    MarketInstance,
    Method,
    Sense,
    SolverFailure,
)
from .lp_backend import EQ, LE, LinearProgram, LpStatus, solve


class UnboundedRelaxation(ValueError):
    """The anchor set does not pin the target price (no forwards, open cone)."""


@dataclass(frozen=True)
class SurfaceAnchor:
    weights: np.ndarray
    strike: float
    price: float
    gradient: np.ndarray  # length n + 1; last entry is the strike slope


@dataclass(frozen=True)
class PriceSurface:
    """Pointwise maximum of the affine pieces attached to the anchors."""

    anchors: tuple[SurfaceAnchor, ...]
    non_strict: Optional[bool] = None  # set only when strictness was probed


@dataclass(frozen=True)
class CleanedChain:
    prices: np.ndarray
    subgradients: np.ndarray  # (m, 2): weight coordinate, strike slope
    l1_distance: float


def surface_eval(surface: PriceSurface, w, strike) -> float:
    """Evaluate max_i { p_i + <g_i, (w, K) - (w_i, K_i)> }; exact at anchors."""
    if not surface.anchors:
        raise ValueError("empty surface")
    w = np.asarray(w, dtype=float)
    point = np.append(w, float(strike))
    best = -np.inf
    for anchor in surface.anchors:
        delta = point - np.append(anchor.weights, anchor.strike)
        best = max(best, anchor.price + float(anchor.gradient @ delta))
    return best


def _anchor_set(market: MarketInstance, w0: np.ndarray, k0: float):
    """Target anchor first, then quotes, then zero-strike forward anchors."""
    anchors = [(w0, k0, None)]
    seen: dict[tuple, float] = {}
    scale = 1.0

    def push(w, k, price):
        nonlocal scale
        key = (tuple(np.round(w, 15)), round(k, 15))
        if key in seen:
            if abs(seen[key] - price) > 1e-9 * max(1.0, abs(price)):
                raise ArbitrageError(
                    "static arbitrage detected in input quotes: identical quote "
                    f"(w={w}, K={k:g}) with prices {seen[key]:g} and {price:g}"
                )
            return
        seen[key] = price
        anchors.append((np.asarray(w, dtype=float), float(k), float(price)))
        scale = max(scale, abs(price))

    for quote in market.quotes:
        push(quote.weights, quote.strike, quote.price)
    if market.forwards is not None:
        q = np.asarray(market.forwards, dtype=float)
        for quote in market.quotes:
            push(quote.weights, 0.0, float(quote.weights @ q))
        push(w0, 0.0, float(w0 @ q))
    return anchors, scale


def _relaxation_lp(anchors, n, sense, gradient_cap):
    """Variables: p0 then one gradient of length n+1 per anchor."""
    count = len(anchors)
    nvar = 1 + count * (n + 1)

    def gslice(i):
        return slice(1 + i * (n + 1), 1 + (i + 1) * (n + 1))

    rows, rels, rhs = [], [], []
    points = [np.append(w, k) for (w, k, _) in anchors]
    for i in range(count):
        for j in range(count):
            if i == j:
                continue
            row = np.zeros(nvar)
            row[gslice(i)] = points[j] - points[i]
            b = 0.0
            p_i, p_j = anchors[i][2], anchors[j][2]
            if p_j is None:
                row[0] = -1.0  # target price enters as a variable
            else:
                b += p_j
            if p_i is None:
                row[0] += 1.0
            else:
                b -= p_i
            rows.append(row)
            rels.append(LE)
            rhs.append(b)
    for i in range(count):
        row = np.zeros(nvar)
        row[gslice(i)] = points[i]
        if anchors[i][2] is None:
            row[0] = -1.0
            b = 0.0
        else:
            b = anchors[i][2]
        rows.append(row)
        rels.append(EQ)
        rhs.append(b)

    lower = np.full(nvar, 0.0)
    upper = np.full(nvar, gradient_cap)
    lower[0], upper[0] = 0.0, np.inf
    for i in range(count):
        sl = gslice(i)
        lower[sl.stop - 1] = -1.0  # strike slope in [-1, 0]
        upper[sl.stop - 1] = 0.0
    c = np.zeros(nvar)
    c[0] = 1.0
    return (
        LinearProgram(
            c=c,
            sense="max" if sense is Sense.UPPER else "min",
            a=np.asarray(rows),
            relations=rels,
            rhs=np.asarray(rhs),
            lower=lower,
            upper=upper,
        ),
        gslice,
    )


def relax_bound(
    market: MarketInstance,
    target_weights,
    target_strike,
    sense: Sense,
    *,
    gradient_cap: Optional[float] = None,
    check_strictness: bool = False,
) -> tuple[BoundResult, PriceSurface]:
    """Bound the target price over all shape-feasible piecewise-affine surfaces.

    Returns the bound and the reconstructed optimal surface, which
    interpolates every anchor and evaluates the bound at the target.  An
    infeasible program means the quotes themselves admit static arbitrage;
    an unbounded one means the anchors cannot pin the target (this cannot
    happen when forwards for all assets are present).
    """
    w0 = np.asarray(target_weights, dtype=float)
    k0 = float(target_strike)
    if w0.shape != (market.n,):
        raise ValueError("target weights must match the market asset count")
    if np.any(w0 < 0) or k0 < 0:
        raise ValueError("target weights and strike must be non-negative")
    if not market.quotes and market.forwards is None:
        raise UnboundedRelaxation("insufficient constraints: no quotes or forwards")

    anchors, scale = _anchor_set(market, w0, k0)
    cap = 1e6 * scale if gradient_cap is None else float(gradient_cap)
    lp, gslice = _relaxation_lp(anchors, market.n, sense, cap)
    sol = solve(lp)
    if sol.status is LpStatus.INFEASIBLE:
        raise ArbitrageError("static arbitrage detected in input quotes")
    if sol.status is LpStatus.UNBOUNDED:
        raise UnboundedRelaxation(
            "insufficient constraints: the relaxation is unbounded for this target"
        )
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"relaxation LP failed: {sol.status.value}")

    p0 = float(sol.x[0])
    # an attained optimum lives at price scale; reaching the gradient cap's
    # magnitude means the program is unbounded in all but name
    if sense is Sense.UPPER and p0 > 0.1 * cap:
        raise UnboundedRelaxation(
            "insufficient constraints: the relaxation is unbounded for this target"
        )
    built = []
    for i, (w, k, price) in enumerate(anchors):
        built.append(
            SurfaceAnchor(
                weights=np.asarray(w, dtype=float).copy(),
                strike=k,
                price=p0 if price is None else price,
                gradient=sol.x[gslice(i)].copy(),
            )
        )
    non_strict = None
    if check_strictness:
        non_strict = _strictness_slack(lp) < 1e-9
    surface = PriceSurface(anchors=tuple(built), non_strict=non_strict)
    return (
        BoundResult(value=p0, sense=sense, method=Method.RELAX_LP, certificate=surface),
        surface,
    )


def _strictness_slack(lp: LinearProgram) -> float:
    """Largest s such that every inequality row can hold with slack >= s."""
    nvar = lp.c.shape[0]
    a = np.hstack([lp.a, np.zeros((lp.a.shape[0], 1))])
    for i, rel in enumerate(lp.relations):
        if rel == LE:
            a[i, -1] = 1.0
    probe = LinearProgram(
        c=np.append(np.zeros(nvar), 1.0),
        sense="max",
        a=a,
        relations=list(lp.relations),
        rhs=lp.rhs.copy(),
        lower=np.append(lp.lower, 0.0),
        upper=np.append(lp.upper, 1e3),
    )
    sol = solve(probe)
    if sol.status is not LpStatus.OPTIMAL:
        return 0.0
    return float(sol.objective)


def clean_chain(
    strikes, prices, forward_anchor: Optional[tuple[float, float]] = None
) -> CleanedChain:
    """Closest (in l1) repair of a call chain to the arbitrage-free cone.

    Minimizes sum_i |y_i - p_i| subject to the one-dimensional shape
    constraints: per-strike subgradients g_i with weight coordinate >= 0,
    strike slope in [-1, 0], pairwise supporting-line inequalities and the
    homogeneity tie g_i . (1, K_i) = y_i.  ``forward_anchor`` optionally pins
    an extra fixed point (strike, price), typically (0, q); off by default.
    """
    ks = np.asarray(strikes, dtype=float)
    ps = np.asarray(prices, dtype=float)
    if ks.ndim != 1 or ks.shape != ps.shape or ks.shape[0] < 1:
        raise ValueError("strikes and prices must be equal-length 1-d vectors")
    if np.any(np.diff(ks) <= 0):
        raise ValueError("strikes must be strictly increasing")
    if np.any(ps < 0):
        raise ValueError("prices must be non-negative")
    m = ks.shape[0]

    fixed: list[tuple[float, float]] = []
    if forward_anchor is not None:
        fk, fp = float(forward_anchor[0]), float(forward_anchor[1])
        if fk >= ks[0]:
            raise ValueError("forward anchor strike must precede the chain")
        fixed.append((fk, fp))
    nf = len(fixed)

    # vars: y (m), g (m+nf, 2), dev+ (m), dev- (m); fixed anchors carry a
    # gradient but their value is a constant.
    def y_idx(i):
        return i

    def g_idx(i, coord):
        return m + 2 * i + coord

    base_dev = m + 2 * (m + nf)
    nvar = base_dev + 2 * m
    all_k = list(ks) + [k for k, _ in fixed]
    all_fixed_price = [None] * m + [p for _, p in fixed]

    rows, rels, rhs = [], [], []

    def add(coeffs, rel, b):
        row = np.zeros(nvar)
        for idx, v in coeffs.items():
            row[idx] += v
        rows.append(row)
        rels.append(rel)
        rhs.append(b)

    total = m + nf
    for i in range(total):
        for j in range(total):
            if i == j:
                continue
            # g_i,2 (K_j - K_i) <= y_j - y_i
            coeffs = {g_idx(i, 1): all_k[j] - all_k[i]}
            b = 0.0
            if all_fixed_price[j] is None:
                coeffs[y_idx(j)] = -1.0
            else:
                b += all_fixed_price[j]
            if all_fixed_price[i] is None:
                coeffs[y_idx(i)] = coeffs.get(y_idx(i), 0.0) + 1.0
            else:
                b -= all_fixed_price[i]
            add(coeffs, LE, b)
    for i in range(total):
        # g_i . (1, K_i) = y_i
        coeffs = {g_idx(i, 0): 1.0, g_idx(i, 1): all_k[i]}
        if all_fixed_price[i] is None:
            coeffs[y_idx(i)] = -1.0
            add(coeffs, EQ, 0.0)
        else:
            add(coeffs, EQ, all_fixed_price[i])
    for i in range(m):
        # y_i - dev+_i + dev-_i = p_i
        add({y_idx(i): 1.0, base_dev + i: -1.0, base_dev + m + i: 1.0}, EQ, float(ps[i]))

    lower = np.full(nvar, -np.inf)
    upper = np.full(nvar, np.inf)
    for i in range(total):
        lower[g_idx(i, 0)] = 0.0
        lower[g_idx(i, 1)], upper[g_idx(i, 1)] = -1.0, 0.0
    lower[base_dev:] = 0.0
    c = np.zeros(nvar)
    c[base_dev:] = 1.0

    sol = solve(
        LinearProgram(
            c=c,
            sense="min",
            a=np.asarray(rows),
            relations=rels,
            rhs=np.asarray(rhs),
            lower=lower,
            upper=upper,
        )
    )
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"chain repair LP failed: {sol.status.value}")
    y = sol.x[:m].copy()
    grads = sol.x[m: m + 2 * m].reshape(m, 2).copy()
    return CleanedChain(prices=y, subgradients=grads, l1_distance=float(sol.objective))
