import numpy as np
import pytest

from basketbounds.lp_backend import (
    EQ,
    GE,
    LE,
    LinearProgram,
    LpStatus,
    solve,
)


def test_bounded_maximum():
    lp = LinearProgram(
        c=np.array([1.0]),
        sense="max",
        a=np.array([[1.0]]),
        relations=[LE],
        rhs=np.array([3.0]),
        lower=np.array([0.0]),
    )
    sol = solve(lp)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(3.0, abs=1e-9)
    assert sol.x[0] == pytest.approx(3.0, abs=1e-9)


def test_unbounded():
    lp = LinearProgram(
        c=np.array([1.0]),
        sense="max",
        a=np.zeros((0, 1)),
        relations=[],
        rhs=np.zeros(0),
        lower=np.array([0.0]),
    )
    assert solve(lp).status is LpStatus.UNBOUNDED


def test_infeasible():
    lp = LinearProgram(
        c=np.array([1.0]),
        sense="max",
        a=np.array([[1.0]]),
        relations=[LE],
        rhs=np.array([-1.0]),
        lower=np.array([0.0]),
    )
    assert solve(lp).status is LpStatus.INFEASIBLE


def test_relation_kinds_and_duals():
    # min x + y  s.t. x + y >= 2, x == 0.5
    lp = LinearProgram(
        c=np.array([1.0, 1.0]),
        sense="min",
        a=np.array([[1.0, 1.0], [1.0, 0.0]]),
        relations=[GE, EQ],
        rhs=np.array([2.0, 0.5]),
        lower=np.zeros(2),
    )
    sol = solve(lp)
    assert sol.status is LpStatus.OPTIMAL
    assert sol.objective == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(sol.x, [0.5, 1.5], atol=1e-9)
    # the >= row is binding with shadow price 1, the equality row is free
    assert sol.duals[0] == pytest.approx(1.0, abs=1e-8)
    assert sol.duals[1] == pytest.approx(0.0, abs=1e-8)


def test_weak_duality_random_programs():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        lp = LinearProgram(
            c=rng.normal(size=n),
            sense="min",
            a=rng.normal(size=(m, n)),
            relations=[LE] * m,
            rhs=rng.uniform(0.5, 2.0, m),
            lower=np.zeros(n),
            upper=np.full(n, 5.0),
        )
        sol = solve(lp)
        assert sol.status is LpStatus.OPTIMAL
        assert abs(sol.dual_objective - sol.objective) <= 1e-6
        assert np.all(lp.a @ sol.x <= lp.rhs + 1e-8)


def test_deterministic_resolve():
    rng = np.random.default_rng(9)
    lp = LinearProgram(
        c=rng.normal(size=6),
        sense="max",
        a=rng.normal(size=(4, 6)),
        relations=[LE] * 4,
        rhs=rng.uniform(1.0, 3.0, 4),
        lower=np.zeros(6),
        upper=np.ones(6),
    )
    first = solve(lp)
    second = solve(lp)
    assert first.objective == second.objective  # bit-identical
    np.testing.assert_array_equal(first.x, second.x)


def test_malformed_programs_rejected():
    with pytest.raises(ValueError, match="sense"):
        LinearProgram(c=np.ones(1), sense="uphill", a=np.zeros((0, 1)), relations=[], rhs=np.zeros(0))
    with pytest.raises(ValueError, match="width"):
        LinearProgram(c=np.ones(2), sense="min", a=np.ones((1, 3)), relations=[LE], rhs=np.ones(1))
    with pytest.raises(ValueError, match="relation"):
        LinearProgram(c=np.ones(1), sense="min", a=np.ones((1, 1)), relations=["<"], rhs=np.ones(1))
    with pytest.raises(ValueError, match="lower bound exceeds"):
        LinearProgram(
            c=np.ones(1),
            sense="min",
            a=np.zeros((0, 1)),
            relations=[],
            rhs=np.zeros(0),
            lower=np.array([2.0]),
            upper=np.array([1.0]),
        )
