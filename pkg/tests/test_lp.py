"""LP engine tests: hand oracles, a vertex-enumeration oracle, duality
certificates, and float/rational agreement."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regcert.lp import LinearProgram, LpError, solve


def _lp(obj, cons, bounds=None):
    return LinearProgram(objective=obj, constraints=cons, bounds=bounds)


class TestHandOracles:
    def test_single_variable_lower_bound(self):
        sol = solve(_lp([1.0], [([1.0], ">=", 3.0)]), "float")
        assert sol.status == "optimal"
        assert sol.value == pytest.approx(3.0, abs=1e-9)

    def test_infeasible(self):
        sol = solve(_lp([1.0], [([1.0], ">=", 3.0), ([1.0], "<=", 2.0)]), "float")
        assert sol.status == "infeasible"

    def test_unbounded(self):
        sol = solve(_lp([-1.0], [([1.0], ">=", 0.0)]), "float")
        assert sol.status == "unbounded"

    def test_bounded_variables(self):
        # min -x - y, 0 <= x <= 1, 0 <= y <= 3 -> -4 at (1, 3)
        sol = solve(_lp([-1.0, -1.0], [], bounds=[(0, 1), (0, 3)]), "float")
        assert sol.value == pytest.approx(-4.0, abs=1e-9)
        assert np.allclose(sol.point, [1.0, 3.0], atol=1e-9)

    def test_equality_constraint(self):
        # min x + y s.t. x + 2y = 4, x,y >= 0 -> 2 at (0, 2)
        sol = solve(_lp([1.0, 1.0], [([1.0, 2.0], "=", 4.0)], bounds=[(0, None)] * 2), "float")
        assert sol.value == pytest.approx(2.0, abs=1e-9)

    def test_rational_exact(self):
        lp = _lp(
            [Fraction(1), Fraction(1)],
            [([Fraction(1), Fraction(2)], "=", Fraction(4))],
            bounds=[(0, None)] * 2,
        )
        sol = solve(lp, "rational")
        assert sol.status == "optimal"
        assert sol.value == Fraction(2)
        assert isinstance(sol.value, Fraction)

    def test_rational_rejects_inexact_float(self):
        lp = _lp([0.5], [([1.0], ">=", 1.0)])
        with pytest.raises(LpError):
            solve(lp, "rational")

    def test_free_variable(self):
        # min x s.t. x >= -5 with x free
        sol = solve(_lp([1.0], [([1.0], ">=", -5.0)]), "float")
        assert sol.value == pytest.approx(-5.0, abs=1e-9)


# ---------------------------------------------------------------------------
# vertex enumeration oracle: for a bounded feasible LP in standard-ish form,
# the optimum is attained at an intersection of active constraints/bounds.


def _vertex_oracle(c, A, rels, b, lo, hi, tol=1e-7):
    """Brute-force optimum over all basic points of {x : Ax rel b, lo<=x<=hi}."""
    n = len(c)
    rows = [np.asarray(a, dtype=float) for a in A]
    rhs = list(b)
    # bounds become rows too
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e.copy())
        rels = rels + [">="]
        rhs.append(lo[i])
        rows.append(e)
        rels = rels + ["<="]
        rhs.append(hi[i])
    m = len(rows)
    best = None
    for combo in itertools.combinations(range(m), n):
        M = np.array([rows[i] for i in combo])
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, np.array([rhs[i] for i in combo], dtype=float))
        ok = True
        for a, rel, bb in zip(rows, rels, rhs):
            v = float(a @ x)
            if rel == "<=" and v > bb + tol:
                ok = False
            elif rel == ">=" and v < bb - tol:
                ok = False
            elif rel == "=" and abs(v - bb) > tol:
                ok = False
            if not ok:
                break
        if ok:
            val = float(np.dot(c, x))
            if best is None or val < best:
                best = val
    return best


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_against_vertex_enumeration(data):
    n = data.draw(st.integers(2, 4))
    m = data.draw(st.integers(1, 5))
    ints = st.integers(-3, 3)
    c = data.draw(st.lists(ints, min_size=n, max_size=n))
    A = [data.draw(st.lists(ints, min_size=n, max_size=n)) for _ in range(m)]
    rels = [data.draw(st.sampled_from(["<=", ">="])) for _ in range(m)]
    b = data.draw(st.lists(st.integers(-4, 4), min_size=m, max_size=m))
    lo, hi = [0.0] * n, [5.0] * n  # box keeps the oracle finite
    lp = _lp(
        [float(v) for v in c],
        [([float(v) for v in row], rel, float(bb)) for row, rel, bb in zip(A, rels, b)],
        bounds=[(0.0, 5.0)] * n,
    )
    sol = solve(lp, "float")
    oracle = _vertex_oracle([float(v) for v in c], A, list(rels), b, lo, hi)
    if oracle is None:
        assert sol.status == "infeasible"
    else:
        assert sol.status == "optimal"
        assert sol.value == pytest.approx(oracle, abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_float_rational_agreement(data):
    n = data.draw(st.integers(2, 3))
    m = data.draw(st.integers(1, 4))
    ints = st.integers(-3, 3)
    c = data.draw(st.lists(ints, min_size=n, max_size=n))
    A = [data.draw(st.lists(ints, min_size=n, max_size=n)) for _ in range(m)]
    rels = [data.draw(st.sampled_from(["<=", ">=", "="])) for _ in range(m)]
    b = data.draw(st.lists(st.integers(-4, 4), min_size=m, max_size=m))
    consf = [([float(v) for v in row], rel, float(bb)) for row, rel, bb in zip(A, rels, b)]
    consr = [([Fraction(v) for v in row], rel, Fraction(bb)) for row, rel, bb in zip(A, rels, b)]
    bounds = [(0, 4)] * n
    solf = solve(_lp([float(v) for v in c], consf, bounds), "float")
    solr = solve(_lp([Fraction(v) for v in c], consr, bounds), "rational")
    assert solf.status == solr.status
    if solf.status == "optimal":
        assert solf.value == pytest.approx(float(solr.value), abs=1e-7)


def test_duality_certificate():
    # optimal duals certify optimality: b'y == c'x at the optimum (strong duality)
    c = [2.0, 3.0]
    cons = [([1.0, 1.0], "<=", 4.0), ([1.0, 3.0], "<=", 6.0)]
    sol = solve(_lp([-ci for ci in c], cons, bounds=[(0, None)] * 2), "float")
    assert sol.status == "optimal"
    y = np.asarray(sol.dual, dtype=float)
    # weak duality for max c'x s.t. Ax <= b, x >= 0: value <= b'y for dual-feasible y
    A = np.array([[1.0, 1.0], [1.0, 3.0]])
    b = np.array([4.0, 6.0])
    assert np.all(A.T @ np.abs(y) >= np.array(c) - 1e-7)
    assert -sol.value == pytest.approx(float(b @ np.abs(y)), abs=1e-7)


def test_degenerate_lp_terminates_rational():
    # heavily degenerate: many redundant equalities; Bland's rule must terminate
    n = 4
    cons = [([Fraction(1)] * n, "=", Fraction(1))] * 3 + [
        ([Fraction(1 if i == j else 0) for j in range(n)], "<=", Fraction(1)) for i in range(n)
    ]
    sol = solve(_lp([Fraction(1)] * n, cons, bounds=[(0, None)] * n), "rational")
    assert sol.status == "optimal"
    assert sol.value == Fraction(1)
