"""Discrete pricing measures: feasibility witnesses, optimal-limit
constructions, and the brute-force grid moment-LP oracle.

Every distribution built here satisfies its declared moment constraints by
construction (exact arithmetic up to rounding), which is what makes them
usable as independent certificates for the closed-form and LP bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BoundResult,
    FeasibilityError,
    MarketInstance,
    Method,
    Sense,
    SolverFailure,
    Violation,
    feasibility_violations,
    payoff,
)
from .lp_backend import EQ, LinearProgram, LpStatus, solve

DEFAULT_POINT_CAP = 200_000


class OracleInfeasible(ValueError):
    """The grid cannot match the moment constraints; refine or seed it."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite support in R+^n with probabilities summing to one."""

    support: np.ndarray  # (k, n)
    probabilities: np.ndarray  # (k,)

    def __post_init__(self):
        sup = np.atleast_2d(np.asarray(self.support, dtype=float))
        pr = np.asarray(self.probabilities, dtype=float)
        if sup.shape[0] != pr.shape[0]:
            raise ValueError("support and probabilities must align")
        if np.any(sup < 0):
            raise ValueError("support points must be non-negative")
        if np.any(pr < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(pr.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {pr.sum()!r}, not 1")
        sup.setflags(write=False)
        pr.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "probabilities", pr)

    @property
    def n(self) -> int:
        return self.support.shape[1]


def price_under(dist: DiscreteDistribution, weights, strike) -> float:
    """Expected basket call payoff under the distribution."""
    w = np.asarray(weights, dtype=float)
    pay = np.maximum(dist.support @ w - float(strike), 0.0)
    return float(dist.probabilities @ pay)


def feasible_comonotone(p, q, strikes) -> DiscreteDistribution:
    """Comonotone coupling of the two-point marginals that reprice (p, q, K).

    Each marginal puts mass (q_i - p_i)/K_i at q_i K_i / (q_i - p_i) and the
    rest at zero; one common uniform drives all assets, so the coupling has at
    most n + 1 distinct support points and reproduces E[x_i] = q_i and
    E[(x_i - K_i)+] = p_i.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    bad = feasibility_violations(p, q, ks)
    for i in range(p.shape[0]):
        if q[i] - p[i] <= 0:
            bad.append(Violation(i, "p < q", f"p={p[i]:.6g}, q={q[i]:.6g} (strict)"))
    if bad:
        raise FeasibilityError(bad)
    n = p.shape[0]
    high = q * ks / (q - p)
    up_prob = (q - p) / ks
    thresholds = 1.0 - up_prob  # asset i is high when the uniform exceeds this
    cuts = np.unique(np.concatenate([[0.0], thresholds, [1.0]]))
    support, probs = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        x = np.where(thresholds <= a, high, 0.0)
        support.append(x)
        probs.append(b - a)
    return DiscreteDistribution(
        support=np.asarray(support), probabilities=np.asarray(probs)
    )


def lower_optimal_sequence(p, strikes, w, strike0, nu, epsilon) -> DiscreteDistribution:
    """Distribution family whose basket price tends to the no-forward lower
    bound as epsilon -> 0 while repricing every option constraint exactly.

    ``nu`` is an optimal simplex vector of the dual program (the certificate of
    ``lower_no_forwards``).  Zero entries receive mass epsilon and the nonzero
    ones give it up pro rata, so each support point p_i/nu_i(eps) + K_i stays
    finite.  When no asset has w_i K_i < K0 the two-point construction
    {p/eps + K w.p. eps; 0 w.p. 1 - eps} is used instead.
    """
    p = np.asarray(p, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    w = np.asarray(w, dtype=float)
    nu = np.asarray(nu, dtype=float)
    eps = float(epsilon)
    n = p.shape[0]
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if nu.shape != p.shape:
        raise ValueError("nu must have one entry per asset")
    k0 = float(strike0)
    active = w * ks < k0
    if not np.any(active):
        if eps >= 1.0:
            raise ValueError("epsilon must be below 1")
        support = np.vstack([p / eps + ks, np.zeros(n)])
        return DiscreteDistribution(
            support=support, probabilities=np.array([eps, 1.0 - eps])
        )

    nu = np.clip(nu, 0.0, None)
    nu = np.where(active, nu, 0.0)  # optimal mass lives on the active set
    total = nu.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError("nu must lie on the simplex (after restriction)")
    nu = nu / total
    carriers = nu > 0.0
    m = int(carriers.sum())
    if m < n:
        spread = (n - m) / m
        if eps >= nu[carriers].min() / spread:
            raise ValueError("epsilon too large for the carrier masses")
        nu_eps = np.where(carriers, nu - spread * eps, eps)
    else:
        nu_eps = nu
    support = np.diag(p / nu_eps + ks)
    return DiscreteDistribution(support=support, probabilities=nu_eps)


def default_axes(p, q, strikes, *, log_points: int = 8, span: float = 4.0) -> list[np.ndarray]:
    """Per-asset grid axes {0, K_i, q_i K_i/(q_i - p_i)} plus log-spaced
    filler up to ``span`` times the largest two-point high level."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    gaps = np.maximum(q - p, 1e-12)
    highs = q * ks / gaps
    top = span * float(highs.max())
    filler = np.geomspace(max(top * 1e-3, 1e-9), top, log_points)
    return [
        np.unique(np.concatenate([[0.0, ks[i], highs[i]], filler]))
        for i in range(p.shape[0])
    ]


def upper_certificate_axes(p, q, strikes, strike0, beta_star) -> list[np.ndarray]:
    """Axes containing the support of a bound-attaining measure for the
    forwards-plus-one-option upper problem at breakpoint ``beta_star``.

    Assets whose own breakpoint (q_i - p_i)/K_i is at most beta_star jump
    between 0 and q_i K_i/(q_i - p_i); the rest move between
    K_i + p_i/beta_star and (q_i - p_i - beta_star K_i)/(1 - beta_star).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ks = np.asarray(strikes, dtype=float)
    b = float(beta_star)
    axes = []
    for i in range(p.shape[0]):
        levels = [0.0, ks[i]]
        if q[i] > p[i]:
            levels.append(q[i] * ks[i] / (q[i] - p[i]))
        if b > 0.0:
            levels.append(ks[i] + p[i] / b)
        if b < 1.0:
            low = (q[i] - p[i] - b * ks[i]) / (1.0 - b)
            if low > 0.0:
                levels.append(low)
        axes.append(np.unique(np.asarray(levels)))
    return axes


def _tensor_points(axes: list[np.ndarray], cap: int) -> np.ndarray:
    axes = [np.unique(np.asarray(ax, dtype=float)) for ax in axes]
    if any(np.any(ax < 0) for ax in axes):
        raise ValueError("grid points must be non-negative")
    # enforce the cap by evenly thinning the longest axes, keeping endpoints
    def size():
        out = 1
        for ax in axes:
            out *= len(ax)
        return out

    while size() > cap:
        j = int(np.argmax([len(ax) for ax in axes]))
        ax = axes[j]
        if len(ax) <= 2:
            raise ValueError("grid exceeds the point cap and cannot be thinned")
        keep = np.unique(np.linspace(0, len(ax) - 1, len(ax) - 1).round().astype(int))
        axes[j] = ax[keep]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_oracle(
    market: MarketInstance,
    target_weights,
    target_strike,
    sense: Sense,
    axes: list[np.ndarray],
    *,
    point_cap: int = DEFAULT_POINT_CAP,
) -> BoundResult:
    """Optimize the target payoff over probability measures on a tensor grid.

    Solves the primal moment LP: optimize E[(w0 . x - K0)+] over grid weights
    pi >= 0 with E[(w_i . x - K_i)+] = p_i for every quote, E[x_j] = q_j for
    every forward, and total mass one.  The value lower-bounds any valid dual
    upper bound (sense Upper) and upper-bounds any valid lower bound (Lower);
    the optimal measure is returned as the certificate.
    """
    w0 = np.asarray(target_weights, dtype=float)
    k0 = float(target_strike)
    points = _tensor_points(axes, point_cap)
    if points.shape[1] != market.n:
        raise ValueError("need one axis per asset")
    cols = points.shape[0]

    rows = [np.ones(cols)]
    rhs = [1.0]
    for quote in market.quotes:
        rows.append(np.maximum(points @ quote.weights - quote.strike, 0.0))
        rhs.append(float(quote.price))
    if market.forwards is not None:
        for j in range(market.n):
            rows.append(points[:, j])
            rhs.append(float(market.forwards[j]))

    lp = LinearProgram(
        c=np.maximum(points @ w0 - k0, 0.0),
        sense="max" if sense is Sense.UPPER else "min",
        a=np.asarray(rows),
        relations=[EQ] * len(rows),
        rhs=np.asarray(rhs),
        lower=np.zeros(cols),
        upper=np.full(cols, np.inf),
    )
    sol = solve(lp)
    if sol.status is LpStatus.INFEASIBLE:
        raise OracleInfeasible(
            "grid cannot match the moment constraints; refine or seed the grid"
        )
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"grid oracle LP failed: {sol.status.value}")
    mass = np.clip(sol.x, 0.0, None)
    keep = mass > 1e-14
    probs = mass[keep]
    dist = DiscreteDistribution(
        support=points[keep], probabilities=probs / probs.sum()
    )
    return BoundResult(
        value=float(sol.objective),
        sense=sense,
        method=Method.ORACLE_GRID,
        certificate=dist,
    )
