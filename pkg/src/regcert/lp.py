"""Minimal two-phase simplex with a float mode and an exact rational mode.

One tableau core serves both modes: float64 arrays with a 1e-9 pivot
tolerance and Dantzig pricing (Bland fallback once cycling is suspected),
or object arrays of ``fractions.Fraction`` with zero tolerance and Bland's
rule throughout, which guarantees termination and exact certificates.

Programs here are tiny (tens of rows), so a dense tableau is the simplest
thing that is obviously correct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

RELATIONS = ("<=", "=", ">=")
FLOAT_TOL = 1e-9
_MAX_ITERS = 100_000


class LpError(ValueError):
    pass


@dataclass
class LinearProgram:
    """min objective . x  subject to rows (coeffs, rel, rhs) and variable bounds.

    bounds is a per-variable list of (lo, hi) with None / +-inf allowed;
    variables default to free.
    """

    objective: list
    constraints: list
    bounds: list | None = None

    def __post_init__(self):
        nvar = len(self.objective)
        if nvar == 0:
            raise LpError("at least one variable required")
        for coeffs, rel, _rhs in self.constraints:
            if len(coeffs) != nvar:
                raise LpError("constraint width does not match objective")
            if rel not in RELATIONS:
                raise LpError(f"unknown relation {rel!r}")
        if self.bounds is not None and len(self.bounds) != nvar:
            raise LpError("bounds length does not match objective")

    @property
    def nvar(self) -> int:
        return len(self.objective)


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    value: object = None
    point: list | None = None
    arithmetic: str = "float"
    # standard-form data kept for duality checks in tests
    std_A: object = None
    std_b: object = None
    std_c: object = None
    dual: object = None
    iterations: int = 0


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if float(x).is_integer():
            return Fraction(int(x))
        raise LpError(
            f"coefficient {x!r} is a non-integral float; rational mode needs exact inputs"
        )
    raise LpError(f"cannot interpret coefficient {x!r} as a rational")


def _is_neg_inf(x):
    return x is None or x == -math.inf


def _is_pos_inf(x):
    return x is None or x == math.inf


def _standardize(lp: LinearProgram, rational: bool):
    """Rewrite as min c.u, A u (rel) b with u >= 0, tracking the variable map."""
    conv = _to_fraction if rational else float
    nvar = lp.nvar
    bounds = lp.bounds if lp.bounds is not None else [(None, None)] * nvar

    var_map = []  # per original var: ("shift", col, lo, sign) or ("split", cp, cm)
    ncols = 0
    extra_rows = []  # upper-bound rows for doubly bounded vars
    for lo, hi in bounds:
        lo_inf, hi_inf = _is_neg_inf(lo), _is_pos_inf(hi)
        if not lo_inf:
            lo = conv(lo)
            var_map.append(("shift", ncols, lo, 1))
            if not hi_inf:
                hi = conv(hi)
                if hi < lo:
                    raise LpError("variable bound lo > hi")
                extra_rows.append((ncols, hi - lo))
            ncols += 1
        elif not hi_inf:
            var_map.append(("shift", ncols, conv(hi), -1))
            ncols += 1
        else:
            var_map.append(("split", ncols, ncols + 1))
            ncols += 2

    zero = Fraction(0) if rational else 0.0

    def expand(coeffs):
        row = [zero] * ncols
        offset = zero
        for i, a in enumerate(coeffs):
            a = conv(a)
            if a == 0:
                continue
            m = var_map[i]
            if m[0] == "shift":
                _, col, off, sign = m
                row[col] += a * sign
                offset += a * off
            else:
                _, cp, cm = m
                row[cp] += a
                row[cm] -= a
        return row, offset

    rows, rels, rhs = [], [], []
    for coeffs, rel, b in lp.constraints:
        row, offset = expand(coeffs)
        rows.append(row)
        rels.append(rel)
        rhs.append(conv(b) - offset)
    for col, ub in extra_rows:
        row = [zero] * ncols
        row[col] = conv(1)
        rows.append(row)
        rels.append("<=")
        rhs.append(ub)

    c, c_offset = expand(lp.objective)
    return rows, rels, rhs, c, c_offset, var_map, ncols


def _simplex(rows, rels, rhs, c, rational: bool):
    """Two-phase tableau simplex.  Returns (status, value, point, dual, iters)."""
    if rational:
        zero, one = Fraction(0), Fraction(1)
        tol = Fraction(0)
    else:
        zero, one = 0.0, 1.0
        tol = FLOAT_TOL

    m = len(rows)
    n = len(c)
    # slacks / surpluses
    nslack = sum(1 for r in rels if r != "=")
    ntot = n + nslack + m  # + artificials
    dtype = object if rational else float
    T = np.zeros((m + 1, ntot + 1), dtype=dtype)
    if rational:
        T[:, :] = Fraction(0)

    sl = n
    for i in range(m):
        for j, a in enumerate(rows[i]):
            T[i, j] = a
        if rels[i] == "<=":
            T[i, sl] = one
            sl += 1
        elif rels[i] == ">=":
            T[i, sl] = -one
            sl += 1
        T[i, -1] = rhs[i]
        if T[i, -1] < zero:
            T[i, :] = -T[i, :]
    art0 = n + nslack
    for i in range(m):
        T[i, art0 + i] = one
    basis = [art0 + i for i in range(m)]

    # phase-1 reduced costs: cost 1 on artificials, basis = artificials
    T[m, :] = -T[:m, :].sum(axis=0) if m else (Fraction(0) if rational else 0.0)
    for i in range(m):
        T[m, art0 + i] = zero

    iters = 0

    def pivot(r, k):
        piv = T[r, k]
        T[r, :] = T[r, :] / piv
        col = T[:, k].copy()
        col[r] = zero
        nz = [i for i in range(m + 1) if col[i] != zero]
        for i in nz:
            T[i, :] = T[i, :] - col[i] * T[r, :]
        basis[r] = k

    def run_phase(allowed_upto, bland_always, phase1=False):
        nonlocal iters
        bland = bland_always
        start = iters
        barred = set()
        while True:
            iters += 1
            if iters > _MAX_ITERS:
                raise LpError("simplex iteration limit exceeded")
            if not bland and iters - start > 3 * (m + ntot) + 50:
                bland = True  # cycling suspected; Bland guarantees exit
            enter = -1
            if bland:
                for j in range(allowed_upto):
                    if j not in barred and T[m, j] < -tol:
                        enter = j
                        break
            else:
                best = -tol
                for j in range(allowed_upto):
                    if j not in barred and T[m, j] < best:
                        best = T[m, j]
                        enter = j
            if enter < 0:
                return "optimal"
            leave = -1
            best_ratio = None
            for i in range(m):
                if T[i, enter] > tol:
                    ratio = T[i, -1] / T[i, enter]
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leave])
                    ):
                        best_ratio = ratio
                        leave = i
            if leave < 0:
                if phase1:
                    # the phase-1 objective is bounded below by 0, so an
                    # unbounded ray here is a float-tolerance artifact: the
                    # reduced cost is noise-level negative while the column
                    # has no usable pivot entry.  Bar the column and go on.
                    barred.add(enter)
                    continue
                return "unbounded"
            pivot(leave, enter)
            barred.clear()

    if m:
        status = run_phase(art0, bland_always=rational, phase1=True)
        assert status == "optimal"  # phase 1 is bounded below by 0
        p1 = -T[m, -1]
        feas_tol = zero if rational else 1e-7 * max(1.0, max(abs(float(v)) for v in rhs) if rhs else 1.0)
        if p1 > feas_tol:
            return "infeasible", None, None, None, iters
        # drive degenerate artificials out of the basis: a basic artificial at
        # value 0 could otherwise be pushed positive by phase-2 pivots,
        # silently leaving the feasible region
        for i in range(m):
            if basis[i] >= art0:
                enter = next(
                    (j for j in range(art0) if T[i, j] > tol or T[i, j] < -tol), -1
                )
                if enter >= 0:
                    pivot(i, enter)
                # else: the row is redundant (all zeros); the artificial stays
                # basic at 0 and no pivot can change it

    # phase 2: recompute reduced costs for the true objective
    T[m, :] = zero
    for j in range(ntot):
        T[m, j] = c[j] if j < n else zero
    T[m, -1] = zero
    for i in range(m):
        cb = c[basis[i]] if basis[i] < n else zero
        if cb != zero:
            T[m, :] = T[m, :] - cb * T[i, :]

    status = run_phase(art0, bland_always=rational)
    if status == "unbounded":
        return "unbounded", None, None, None, iters

    point = [zero] * n
    for i in range(m):
        if basis[i] < n:
            point[basis[i]] = T[i, -1]
    value = -T[m, -1]
    # duals: artificial column j holds B^{-1} e_j, so the phase-2 reduced
    # cost there equals -y_j
    dual = [-T[m, art0 + i] for i in range(m)]
    return "optimal", value, point, dual, iters


def solve(lp: LinearProgram, arithmetic: str = "float") -> LpSolution:
    """Solve a linear program in the requested arithmetic."""
    if arithmetic not in ("float", "rational"):
        raise LpError(f"unknown arithmetic mode {arithmetic!r}")
    rational = arithmetic == "rational"
    rows, rels, rhs, c, c_offset, var_map, ncols = _standardize(lp, rational)
    status, value, point, dual, iters = _simplex(rows, rels, rhs, c, rational)
    if status != "optimal":
        return LpSolution(status=status, arithmetic=arithmetic, iterations=iters)

    x = []
    for mpng in var_map:
        if mpng[0] == "shift":
            _, col, off, sign = mpng
            x.append(off + sign * point[col])
        else:
            _, cp, cm = mpng
            x.append(point[cp] - point[cm])
    return LpSolution(
        status="optimal",
        value=value + c_offset,
        point=x,
        arithmetic=arithmetic,
        std_A=rows,
        std_b=rhs,
        std_c=c,
        dual=dual,
        iterations=iters,
    )
