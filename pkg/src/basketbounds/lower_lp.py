"""Lower bound given forwards and one option per asset, as a single LP.

The program maximizes lambda.p + mu.(q - K) + h subject to lambda + mu <= w
and one epigraph block per index i = 0..n.  The positive parts
(alpha_i w_j - mu_j)+ are linearized with one auxiliary variable per
(block, asset) pair, which is exact here because h is maximized and the
auxiliaries enter with non-positive coefficients; (lambda_i + mu_i)+ is
linearized the same way through s_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundResult, Method, Sense, SolverFailure
from .lp_backend import EQ, LE, LinearProgram, LpStatus, solve


@dataclass(frozen=True)
class LowerCertificate:
    """Dual portfolio (lambda, mu, alpha, h) whose objective equals the bound."""

    lam: np.ndarray
    mu: np.ndarray
    alpha: np.ndarray  # alpha_0 .. alpha_n
    h: float


def lower_with_forwards(p, q, strikes, w, strike0) -> BoundResult:
    """Lower bound on the basket price given forwards q and options (K, p).

    The value never falls below the intrinsic bound max(0, w.q - K0); the
    returned certificate satisfies every constraint of the program and its
    objective reproduces the value.
    """
    from .closed_bounds import _prepare  # shares validation with the upper bound

    p, q, ks, w, k0 = _prepare(p, q, strikes, w, strike0)
    n = p.shape[0]
    wk = float(w @ ks)

    # variable layout: lam(n), mu(n), alpha(n+1), h, s(n), t[i=0..n] (n each)
    idx_lam = 0
    idx_mu = n
    idx_alpha = 2 * n
    idx_h = 3 * n + 1
    idx_s = 3 * n + 2
    idx_t = 4 * n + 2
    nvar = 4 * n + 2 + (n + 1) * n

    def t_index(block: int, j: int) -> int:
        return idx_t + block * n + j

    rows, rels, rhs = [], [], []

    def add(coeffs: dict[int, float], rel: str, b: float):
        row = np.zeros(nvar)
        for k, v in coeffs.items():
            row[k] = v
        rows.append(row)
        rels.append(rel)
        rhs.append(b)

    for i in range(n):
        add({idx_lam + i: 1.0, idx_mu + i: 1.0}, LE, float(w[i]))

    for block in range(n + 1):
        # h <= alpha_block (w.K - K0) - sum_j t[block, j] K_j  (j != i for blocks >= 1)
        coeffs = {idx_h: 1.0, idx_alpha + block: -(wk - k0)}
        skip = block - 1  # asset excluded from the sum in blocks 1..n
        for j in range(n):
            if j == skip:
                continue
            coeffs[t_index(block, j)] = float(ks[j])
        add(coeffs, LE, 0.0)
        # t[block, j] >= alpha_block w_j - mu_j
        for j in range(n):
            if j == skip:
                continue
            add(
                {idx_alpha + block: float(w[j]), idx_mu + j: -1.0, t_index(block, j): -1.0},
                LE,
                0.0,
            )

    for i in range(n):
        # s_i >= lambda_i + mu_i and s_i <= alpha_i w_i enforce (lam+mu)+/w <= alpha_i
        add({idx_lam + i: 1.0, idx_mu + i: 1.0, idx_s + i: -1.0}, LE, 0.0)
        add({idx_s + i: 1.0, idx_alpha + (i + 1): -float(w[i])}, LE, 0.0)

    lower = np.full(nvar, -np.inf)
    upper = np.full(nvar, np.inf)
    lower[idx_alpha: idx_alpha + n + 1] = 0.0
    upper[idx_alpha: idx_alpha + n + 1] = 1.0
    lower[idx_s: idx_s + n] = 0.0
    lower[idx_t:] = 0.0

    c = np.zeros(nvar)
    c[idx_lam: idx_lam + n] = p
    c[idx_mu: idx_mu + n] = q - ks
    c[idx_h] = 1.0

    lp = LinearProgram(
        c=c,
        sense="max",
        a=np.asarray(rows),
        relations=rels,
        rhs=np.asarray(rhs),
        lower=lower,
        upper=upper,
    )
    sol = solve(lp)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"lower-bound LP failed: {sol.status.value}")
    value = float(sol.objective) if sol.objective > 0.0 else 0.0  # zero is always valid
    cert = LowerCertificate(
        lam=sol.x[idx_lam: idx_lam + n].copy(),
        mu=sol.x[idx_mu: idx_mu + n].copy(),
        alpha=sol.x[idx_alpha: idx_alpha + n + 1].copy(),
        h=float(sol.x[idx_h]),
    )
    return BoundResult(value=value, sense=Sense.LOWER, method=Method.LOWER_LP, certificate=cert)
