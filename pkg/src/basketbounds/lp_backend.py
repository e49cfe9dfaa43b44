"""Minimal dense linear-programming contract shared by every LP-based solver.

The representation keeps tagged rows (<=, ==, >=) and per-variable bounds;
solutions carry primal values, one dual value per row in the original order,
and both objective values so callers can check weak duality.  Problems in
this package are small (at most a few hundred rows), so a dense matrix is
always adequate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = (LE, EQ, GE)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LpSettings:
    """Solver tolerances; the defaults apply package-wide."""

    feasibility_tol: float = 1e-8
    optimality_tol: float = 1e-6


DEFAULT_SETTINGS = LpSettings()


@dataclass
class LinearProgram:
    """max/min c.x subject to tagged rows a_i.x (<=|==|>=) rhs_i and box bounds.

    ``lower``/``upper`` default to (-inf, +inf); rows are (m, n) dense.
    """

    c: np.ndarray
    sense: str  # "max" | "min"
    a: np.ndarray
    relations: list[str]
    rhs: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        n = self.c.shape[0]
        if self.a.size == 0:
            self.a = self.a.reshape(0, n)
        if self.a.ndim != 2 or self.a.shape[1] != n:
            raise ValueError("constraint matrix width must match objective length")
        m = self.a.shape[0]
        if len(self.relations) != m or self.rhs.shape != (m,):
            raise ValueError("relations/rhs length must match row count")
        for rel in self.relations:
            if rel not in _RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
        self.lower = (
            np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        )
        self.upper = (
            np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, float)
        )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None  # one per row, original order
    objective: Optional[float] = None
    dual_objective: Optional[float] = None
    message: str = ""


def solve(lp: LinearProgram, settings: LpSettings = DEFAULT_SETTINGS) -> LpSolution:
    """Solve the program; deterministic for a fixed input.

    On OPTIMAL the primal satisfies every row within ``feasibility_tol``
    (scaled) and complementary slackness within ``optimality_tol``; breaching
    either downgrades the status to NUMERICAL_FAILURE rather than returning a
    silently wrong answer.
    """
    sign = -1.0 if lp.sense == "max" else 1.0
    rels = np.asarray(lp.relations)
    ub_mask = rels == LE
    ge_mask = rels == GE
    eq_mask = rels == EQ

    a_ub = np.vstack([lp.a[ub_mask], -lp.a[ge_mask]]) if (ub_mask.any() or ge_mask.any()) else None
    b_ub = np.concatenate([lp.rhs[ub_mask], -lp.rhs[ge_mask]]) if a_ub is not None else None
    a_eq = lp.a[eq_mask] if eq_mask.any() else None
    b_eq = lp.rhs[eq_mask] if a_eq is not None else None
    bounds = list(zip(lp.lower, lp.upper))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # HiGHS chatter on degenerate inputs
        res = linprog(
            sign * lp.c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=bounds,
            method="highs",
            options={
                "presolve": True,
                "primal_feasibility_tolerance": settings.feasibility_tol,
                "dual_feasibility_tolerance": min(settings.optimality_tol, 1e-7),
            },
        )

    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, message=res.message)
    if res.status != 0:
        return LpSolution(LpStatus.NUMERICAL_FAILURE, message=res.message)

    x = np.asarray(res.x, dtype=float)
    objective = float(sign * res.fun)

    # Reassemble row duals in the original order, undoing the >= negation and
    # the max->min sign flip.
    duals = np.zeros(lp.a.shape[0])
    marg_ub = res.ineqlin.marginals if a_ub is not None else np.zeros(0)
    n_le = int(ub_mask.sum())
    duals[ub_mask] = marg_ub[:n_le]
    duals[ge_mask] = -marg_ub[n_le:]
    if a_eq is not None:
        duals[eq_mask] = res.eqlin.marginals
    duals *= sign

    # a marginal at an infinite bound is always zero, so masking the bound is safe
    finite_lower = np.where(np.isfinite(lp.lower), lp.lower, 0.0)
    finite_upper = np.where(np.isfinite(lp.upper), lp.upper, 0.0)
    dual_objective = float(
        (marg_ub @ b_ub if a_ub is not None else 0.0)
        + (res.eqlin.marginals @ b_eq if a_eq is not None else 0.0)
        + finite_lower @ res.lower.marginals
        + finite_upper @ res.upper.marginals
    ) * sign

    problem = _residuals(lp, x, duals)
    scale = max(1.0, float(np.max(np.abs(lp.rhs), initial=0.0)), float(np.max(np.abs(x), initial=0.0)))
    if problem["feasibility"] > settings.feasibility_tol * 10 * scale:
        return LpSolution(
            LpStatus.NUMERICAL_FAILURE,
            message=f"feasibility residual {problem['feasibility']:.3e} above tolerance",
        )
    if problem["comp_slackness"] > settings.optimality_tol * scale:
        return LpSolution(
            LpStatus.NUMERICAL_FAILURE,
            message=f"complementary slackness residual {problem['comp_slackness']:.3e}",
        )
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        duals=duals,
        objective=objective,
        dual_objective=dual_objective,
        message=res.message,
    )


def _residuals(lp: LinearProgram, x: np.ndarray, duals: np.ndarray) -> dict:
    if lp.a.shape[0] == 0:
        return {"feasibility": 0.0, "comp_slackness": 0.0}
    ax = lp.a @ x
    feas = 0.0
    comp = 0.0
    for i, rel in enumerate(lp.relations):
        slack = lp.rhs[i] - ax[i]
        if rel == LE:
            feas = max(feas, -slack)
            comp = max(comp, abs(duals[i] * slack))
        elif rel == GE:
            feas = max(feas, slack)
            comp = max(comp, abs(duals[i] * slack))
        else:
            feas = max(feas, abs(slack))
    return {"feasibility": feas, "comp_slackness": comp}
