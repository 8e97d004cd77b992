"""Regularity constants of design matrices: exact where enumeration permits,
certified bounds otherwise.

Exact routes (spark, incoherence, RIP, l1/linf sensitivity) enumerate
supports and sign patterns and solve one small LP per subproblem. The
nonconvex quantities (restricted eigenvalue, compatibility, lq sensitivity
for 1 < q < inf) are reported as upper bounds from seeded multistart
projected minimization: every iterate is projected back into its
(support, sign) polytope, so any returned value is a true upper bound on
the minimum; optimization quality only affects tightness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .linalg import cone_membership, gram, jacobi_eigvals, top_s_support
from .lp import LinearProgram, LpError, solve
from .types import ConeSpec, CrossCovariance, DesignMatrix, as_array

ENUM_BUDGET = 10_000_000
RIP_BUDGET = 1_000_000
SPARK_MAX_P = 20
SENS_MAX_P = 12
MULTISTART_COUNT = 200
MULTISTART_ITERS = 300
MULTISTART_SEED = 20240

INF = math.inf


class BudgetExceeded(ValueError):
    pass


@dataclass
class RegularityReport:
    property: str
    constant: object
    mode: str  # exact | upper_bound | lower_bound
    s: int | None = None
    alpha: object = None
    q: object = None
    witness: list | None = None
    witness_support: tuple | None = None
    enumeration_size: int = 0
    arithmetic: str = "float"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, Fraction):
                return f"{x.numerator}/{x.denominator}"
            if isinstance(x, (np.floating, np.integer)):
                return x.item()
            if isinstance(x, (list, tuple)):
                return [enc(v) for v in x]
            if isinstance(x, dict):
                return {k: enc(v) for k, v in x.items()}
            if isinstance(x, np.ndarray):
                return [enc(v) for v in x.tolist()]
            if x is INF:
                return "inf"
            return x

        return {
            "property": self.property,
            "constant": enc(self.constant),
            "mode": self.mode,
            "s": self.s,
            "alpha": enc(self.alpha),
            "q": enc(self.q),
            "witness": enc(self.witness),
            "witness_support": list(self.witness_support) if self.witness_support else None,
            "enumeration_size": self.enumeration_size,
            "arithmetic": self.arithmetic,
            "extra": enc(self.extra),
        }


@dataclass
class Decision:
    status: str  # holds | fails | indeterminate
    gamma: object
    constant: object = None
    lower_bound: object = None
    upper_bound: object = None
    witness: list | None = None

    @property
    def holds(self) -> bool:
        if self.status == "indeterminate":
            raise ValueError("decision is indeterminate")
        return self.status == "holds"


# ---------------------------------------------------------------------------
# rank / spark


def _rank_exact(cols: list[list[Fraction]]) -> int:
    """Rank of the matrix with the given columns, by rational elimination."""
    if not cols:
        return 0
    m = len(cols[0])
    work = [list(col) for col in cols]
    rank = 0
    for r in range(m):
        piv = next((j for j in range(rank, len(work)) if work[j][r] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        lead = work[rank][r]
        for j in range(rank + 1, len(work)):
            f = work[j][r] / lead
            if f:
                work[j] = [a - f * b for a, b in zip(work[j], work[rank])]
        rank += 1
        if rank == len(work):
            break
    return rank


def _rank_float(A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > 1e-10 * sv[0] * max(A.shape)))


def spark(X) -> int:
    """Smallest number of linearly dependent columns; p+1 if independent.

    Uses exact rational elimination when the matrix is integral.
    """
    integral = isinstance(X, DesignMatrix) and X.integral
    A = as_array(X)
    n, p = A.shape
    if p > SPARK_MAX_P:
        raise BudgetExceeded(f"spark enumeration limited to p <= {SPARK_MAX_P}")
    if integral:
        cols = [[Fraction(int(round(A[i, j]))) for i in range(n)] for j in range(p)]
        rank_of = lambda idx: _rank_exact([cols[j] for j in idx])
    else:
        rank_of = lambda idx: _rank_float(A[:, list(idx)])
    if rank_of(range(p)) == p:
        return p + 1
    for k in range(1, p + 1):
        for S in combinations(range(p), k):
            if rank_of(S) < k:
                return k
    return p + 1  # unreachable


# ---------------------------------------------------------------------------
# incoherence / RIP


def incoherence_constant(X) -> float:
    """Max |<x_i, x_j>|/n over i != j after scaling columns to length sqrt(n)."""
    A = as_array(X)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ValueError("incoherence undefined for a zero column")
    C = (A / norms).T @ (A / norms)
    np.fill_diagonal(C, 0.0)
    return float(np.max(np.abs(C)))


def rip_constant_from_gram(G, s: int) -> RegularityReport:
    """delta_s of a matrix with Gram G: worst eigenvalue distortion over |S|=s."""
    G = as_array(G)
    p = G.shape[0]
    if math.comb(p, s) > RIP_BUDGET:
        raise BudgetExceeded("RIP support enumeration budget exceeded")
    worst = -INF
    worst_S = None
    count = 0
    for S in combinations(range(p), s):
        sub = G[np.ix_(S, S)]
        w = jacobi_eigvals(sub)
        d = max(float(w[-1]) - 1.0, 1.0 - float(w[0]))
        count += 1
        if d > worst:
            worst, worst_S = d, S
    return RegularityReport(
        property="rip",
        constant=worst,
        mode="exact",
        s=s,
        witness_support=worst_S,
        enumeration_size=count,
    )


def rip_constant(X, s: int) -> RegularityReport:
    """delta_s of X with the Gram X^T X / n."""
    return rip_constant_from_gram(gram(X), s)


# ---------------------------------------------------------------------------
# exact lq sensitivity via sign-pattern LP enumeration


def _sens_budget(p: int, s: int, extra: int = 1):
    if p > SENS_MAX_P:
        raise BudgetExceeded(f"sensitivity enumeration limited to p <= {SENS_MAX_P}")
    if (2**p) * math.comb(p, s) * extra > ENUM_BUDGET:
        raise BudgetExceeded("sensitivity (support, sign-pattern) budget exceeded")


def _psi_rows(Psi, arithmetic):
    """Cross-covariance as a list of rows in the requested arithmetic."""
    if arithmetic == "rational":
        if isinstance(Psi, CrossCovariance):
            raise LpError("rational mode needs exact Fraction/int entries, not floats")
        rows = [
            [
                Fraction(int(v)) if isinstance(v, (int, np.integer)) else (v if isinstance(v, Fraction) else _reject_float(v))
                for v in row
            ]
            for row in Psi
        ]
        return rows
    A = as_array(Psi) if not isinstance(Psi, list) else np.array(Psi, dtype=float)
    return [list(map(float, row)) for row in A]


def _reject_float(v):
    raise LpError(f"rational mode needs exact Fraction/int entries, got {v!r}")


def _half_sign_patterns(p: int):
    """All sign patterns with the first coordinate fixed +1 (global-flip symmetry)."""
    for tail in product((1, -1), repeat=p - 1):
        yield (1,) + tail


def l1_sensitivity(Psi, spec: ConeSpec, arithmetic: str = "float") -> RegularityReport:
    """Exact min over C(s, alpha) of s |Psi v|_inf / |v|_1 by LP enumeration.

    One LP per (support, sign-pattern): in u-space (u_i = eps_i v_i >= 0),
    minimize t subject to |Psi (eps*u)|_j <= t, sum u = 1 and the cone
    inequality on u.
    """
    rows = _psi_rows(Psi, arithmetic)
    L, p = len(rows), len(rows[0])
    s, alpha = spec.s, spec.alpha
    spec.validate_for_width(p)
    _sens_budget(p, s)
    if arithmetic == "rational" and not spec.is_rational:
        raise LpError("rational mode requires an exact (int/Fraction) alpha")

    one = Fraction(1) if arithmetic == "rational" else 1.0
    zero = one - one
    best = None
    best_point = None
    best_S = None
    count = 0
    objective = [zero] * p + [one]
    var_bounds = [(0, None)] * (p + 1)
    for S in combinations(range(p), s):
        in_S = [i in S for i in range(p)]
        cone_row = [(-alpha * one if in_S[i] else one) for i in range(p)] + [zero]
        for eps in _half_sign_patterns(p):
            cons = [
                ([one] * p + [zero], "=", one),
                (cone_row, "<=", zero),
            ]
            for j in range(L):
                r = [rows[j][i] * eps[i] for i in range(p)]
                cons.append((r + [-one], "<=", zero))
                cons.append(([-v for v in r] + [-one], "<=", zero))
            sol = solve(LinearProgram(objective, cons, var_bounds), arithmetic)
            count += 1
            if sol.status != "optimal":  # polytope is always nonempty
                raise LpError(f"unexpected LP status {sol.status} in l1 sensitivity")
            if best is None or sol.value < best:
                best = sol.value
                best_point = [eps[i] * sol.point[i] for i in range(p)]
                best_S = S
    constant = s * best
    return RegularityReport(
        property="lq_sensitivity",
        constant=constant,
        mode="exact",
        s=s,
        alpha=alpha,
        q=1,
        witness=best_point,
        witness_support=best_S,
        enumeration_size=count,
        arithmetic=arithmetic,
    )


def linf_sensitivity(Psi, spec: ConeSpec, arithmetic: str = "float") -> RegularityReport:
    """Exact min over C(s, alpha) of |Psi v|_inf / |v|_inf.

    Enumerates (S, eps, k) where coordinate k attains |v|_inf; the LP fixes
    u_k = 1 and bounds all u_j in [0, 1].
    """
    rows = _psi_rows(Psi, arithmetic)
    L, p = len(rows), len(rows[0])
    s, alpha = spec.s, spec.alpha
    spec.validate_for_width(p)
    _sens_budget(p, s, extra=2 * p)

    one = Fraction(1) if arithmetic == "rational" else 1.0
    zero = one - one
    best = None
    best_point = None
    best_S = None
    count = 0
    objective = [zero] * p + [one]
    for S in combinations(range(p), s):
        in_S = [i in S for i in range(p)]
        cone_row = [(-alpha * one if in_S[i] else one) for i in range(p)] + [zero]
        for eps in _half_sign_patterns(p):
            base_cons = [(cone_row, "<=", zero)]
            for j in range(L):
                r = [rows[j][i] * eps[i] for i in range(p)]
                base_cons.append((r + [-one], "<=", zero))
                base_cons.append(([-v for v in r] + [-one], "<=", zero))
            for k in range(p):
                bounds = [(0, 1)] * p + [(0, None)]
                bounds[k] = (1, 1)
                sol = solve(LinearProgram(objective, base_cons, bounds), arithmetic)
                count += 1
                if sol.status != "optimal":
                    raise LpError(f"unexpected LP status {sol.status} in linf sensitivity")
                if best is None or sol.value < best:
                    best = sol.value
                    best_point = [eps[i] * sol.point[i] for i in range(p)]
                    best_S = S
    return RegularityReport(
        property="lq_sensitivity",
        constant=best,
        mode="exact",
        s=s,
        alpha=alpha,
        q=INF,
        witness=best_point,
        witness_support=best_S,
        enumeration_size=count,
        arithmetic=arithmetic,
    )


# ---------------------------------------------------------------------------
# multistart machinery for the nonconvex quantities


def _project_polytope(U, S_mask, alpha):
    """Project rows of U (>= 0 clip, then cone inequality by shrinking the tail)."""
    U = np.maximum(U, 0.0)
    on = U[:, S_mask].sum(axis=1)
    off = U[:, ~S_mask].sum(axis=1)
    dead = on <= 0
    if np.any(dead):
        U[np.ix_(dead, np.flatnonzero(~S_mask))] = 0.0
        U[np.ix_(dead, np.flatnonzero(S_mask))] = 1.0
        on = U[:, S_mask].sum(axis=1)
        off = U[:, ~S_mask].sum(axis=1)
    bad = off > alpha * on
    if np.any(bad):
        scale = np.ones(len(U))
        scale[bad] = (alpha * on[bad]) / off[bad]
        U[:, ~S_mask] *= scale[:, None]
    return U


def _structured_starts(p, S, rng, n_random):
    S = list(S)
    starts = []
    for i in S:
        e = np.zeros(p)
        e[i] = 1.0
        starts.append(e)
    for i, j in combinations(S, 2):
        e = np.zeros(p)
        e[i] = e[j] = 1.0
        starts.append(e)
    flat_S = np.zeros(p)
    flat_S[S] = 1.0
    starts.append(flat_S)
    starts.append(np.ones(p))
    n_random = max(n_random - len(starts), 0)
    if n_random:
        starts.append(rng.random((n_random, p)))
    return np.vstack([np.atleast_2d(s) for s in starts])


def _multistart_min(value_grad, p, S, alpha, rng, n_starts=MULTISTART_COUNT, iters=MULTISTART_ITERS):
    """Minimize a scale-invariant ratio over one (S, eps) polytope.

    value_grad(U) -> (values, grads) in u-space for a batch of points.
    Returns (best value, best point) with the point exactly feasible.
    """
    S_mask = np.zeros(p, dtype=bool)
    S_mask[list(S)] = True
    U = _structured_starts(p, S, rng, n_starts)
    U = _project_polytope(U, S_mask, alpha)
    best_val = np.full(len(U), np.inf)
    best_U = U.copy()
    step = 0.3
    for _ in range(iters):
        vals, grads = value_grad(U)
        better = vals < best_val - 1e-15
        if np.any(better):
            best_val[better] = vals[better]
            best_U[better] = U[better]
        gnorm = np.linalg.norm(grads, axis=1, keepdims=True)
        gnorm[gnorm == 0] = 1.0
        U = _project_polytope(U - step * grads / gnorm, S_mask, alpha)
        step *= 0.985
    vals, _ = value_grad(U)
    better = vals < best_val
    best_val[better] = vals[better]
    best_U[better] = U[better]
    k = int(np.argmin(best_val))
    return float(best_val[k]), best_U[k]


def _ratio_value_grad_factory(numer, denom):
    """(values, grads) of numer/denom from per-part (value, grad) callables."""

    def value_grad(U):
        nv, ng = numer(U)
        dv, dg = denom(U)
        safe = np.maximum(dv, 1e-300)
        vals = np.where(dv > 0, nv / safe, np.inf)
        grads = (ng * safe[:, None] - dg * nv[:, None]) / (safe**2)[:, None]
        return vals, grads

    return value_grad


def _bound_over_polytopes(A_or_psi, spec, make_value_grad, prop, seed=MULTISTART_SEED):
    p = A_or_psi.shape[1]
    s, alpha = spec.s, float(spec.alpha)
    spec.validate_for_width(p)
    _sens_budget(p, s)
    rng = np.random.default_rng(seed)
    best = INF
    best_v = None
    best_S = None
    count = 0
    for S in combinations(range(p), s):
        for eps in _half_sign_patterns(p):
            eps_arr = np.array(eps, dtype=float)
            value_grad = make_value_grad(S, eps_arr)
            val, u = _multistart_min(value_grad, p, S, alpha, rng)
            count += 1
            if val < best:
                best = val
                best_v = eps_arr * u
                best_S = S
    return best, best_v, best_S, count


def re_constant(A, spec: ConeSpec, seed=MULTISTART_SEED) -> RegularityReport:
    """Upper bound on min over C(s, alpha) of |Av|_2 / |v_S|_2.

    Pass A = X / sqrt(n) for a design matrix or a symmetric root of Sigma
    for a population covariance.
    """
    A = as_array(A)

    def make(S, eps):
        Slist = list(S)

        def numer(U):
            V = U * eps
            AV = V @ A.T
            nv = np.linalg.norm(AV, axis=1)
            safe = np.maximum(nv, 1e-300)
            g = (AV / safe[:, None]) @ A * eps
            return nv, g

        def denom(U):
            dv = np.linalg.norm(U[:, Slist], axis=1)
            g = np.zeros_like(U)
            safe = np.maximum(dv, 1e-300)
            g[:, Slist] = U[:, Slist] / safe[:, None]
            return dv, g

        return _ratio_value_grad_factory(numer, denom)

    best, v, S, count = _bound_over_polytopes(A, spec, make, "re", seed)
    rep = RegularityReport(
        property="re",
        constant=best,
        mode="upper_bound",
        s=spec.s,
        alpha=spec.alpha,
        witness=list(v),
        witness_support=S,
        enumeration_size=count,
        extra={"constant_squared": best**2},
    )
    return rep


def compatibility_constant(A, spec: ConeSpec, seed=MULTISTART_SEED) -> RegularityReport:
    """Upper bound on min over C(s, alpha) of sqrt(s) |Av|_2 / |v_S|_1."""
    A = as_array(A)
    rs = math.sqrt(spec.s)

    def make(S, eps):
        Slist = list(S)

        def numer(U):
            V = U * eps
            AV = V @ A.T
            nv = np.linalg.norm(AV, axis=1)
            safe = np.maximum(nv, 1e-300)
            g = (AV / safe[:, None]) @ A * eps
            return rs * nv, rs * g

        def denom(U):
            dv = U[:, Slist].sum(axis=1)  # u >= 0 so this is |v_S|_1
            g = np.zeros_like(U)
            g[:, Slist] = 1.0
            return dv, g

        return _ratio_value_grad_factory(numer, denom)

    best, v, S, count = _bound_over_polytopes(A, spec, make, "compatibility", seed)
    return RegularityReport(
        property="compatibility",
        constant=best,
        mode="upper_bound",
        s=spec.s,
        alpha=spec.alpha,
        witness=list(v),
        witness_support=S,
        enumeration_size=count,
    )


def lq_sensitivity(Psi, spec: ConeSpec, arithmetic: str = "float", seed=MULTISTART_SEED) -> RegularityReport:
    """s^{1/q} |Psi v|_inf / |v|_q over the cone.

    Exact for q in {1, inf}; otherwise a multistart upper bound with a
    certified lower bound s^{1/q - 1} * gamma_1 from the exact q = 1 value.
    """
    q = spec.q
    if q == 1:
        return l1_sensitivity(Psi, spec, arithmetic)
    if q == INF:
        return linf_sensitivity(Psi, spec, arithmetic)
    if arithmetic == "rational":
        raise LpError("rational arithmetic only supported for q in {1, inf}")
    P = as_array(Psi)
    s = spec.s
    sq = s ** (1.0 / q)

    def make(S, eps):
        def numer(U):
            V = U * eps
            PV = V @ P.T
            j = np.argmax(np.abs(PV), axis=1)
            rows = np.arange(len(U))
            nv = np.abs(PV[rows, j])
            sign = np.sign(PV[rows, j])
            g = sign[:, None] * P[j] * eps
            return sq * nv, sq * g

        def denom(U):
            dv = np.linalg.norm(U, ord=q, axis=1)
            safe = np.maximum(dv, 1e-300)
            g = (U / safe[:, None]) ** (q - 1.0)
            g = np.sign(U) * np.abs(g)
            return dv, g

        return _ratio_value_grad_factory(numer, denom)

    upper, v, S, count = _bound_over_polytopes(P, spec, make, "lq", seed)
    gamma1 = l1_sensitivity(Psi, ConeSpec(s, spec.alpha, 1), arithmetic)
    lower = float(gamma1.constant) * s ** (1.0 / q - 1.0)
    return RegularityReport(
        property="lq_sensitivity",
        constant=upper,
        mode="upper_bound",
        s=s,
        alpha=spec.alpha,
        q=q,
        witness=list(v),
        witness_support=S,
        enumeration_size=count,
        extra={"lower_bound": lower, "gamma_l1": float(gamma1.constant)},
    )


# ---------------------------------------------------------------------------
# decision procedure


def _sigma_min_lower_bound(A: np.ndarray) -> float:
    """sqrt(lambda_min(A^T A)): valid RE and compatibility lower bound."""
    w = jacobi_eigvals(gram(A, n_scale=1))
    return float(math.sqrt(max(float(w[0]), 0.0)))


def decide(
    property: str,
    matrix,
    spec: ConeSpec,
    gamma,
    arithmetic: str = "float",
    lower_bound=None,
) -> Decision:
    """Does the matrix obey ``property`` with parameters (s, alpha, gamma)?

    Exact properties compare the computed constant with gamma; bound-mode
    properties return ``indeterminate`` when gamma falls between the
    certified lower bound and the computed upper bound.

    On the rational path for re/compatibility the exact q=1 sensitivity of
    the Gram serves as the zero test (gamma_1 = 0 iff a cone vector lies in
    the kernel iff the constant is 0); a caller-supplied certified
    ``lower_bound`` settles the positive side.
    """
    if property in ("lq", "lq_sensitivity"):
        rep = lq_sensitivity(matrix, spec, arithmetic)
        if rep.mode == "exact":
            holds = rep.constant >= gamma
            return Decision(
                status="holds" if holds else "fails",
                gamma=gamma,
                constant=rep.constant,
                witness=None if holds else rep.witness,
            )
        lower = rep.extra["lower_bound"]
        if lower >= gamma:
            return Decision(status="holds", gamma=gamma, lower_bound=lower, upper_bound=rep.constant)
        if rep.constant < gamma:
            return Decision(
                status="fails",
                gamma=gamma,
                lower_bound=lower,
                upper_bound=rep.constant,
                witness=rep.witness,
            )
        return Decision(status="indeterminate", gamma=gamma, lower_bound=lower, upper_bound=rep.constant)

    if property in ("re", "compat", "compatibility"):
        if arithmetic == "rational":
            A = matrix
            if isinstance(A, DesignMatrix):
                if not A.integral:
                    raise LpError("rational re/compat decisions need an integral matrix")
                M = A.int_values()
            else:
                M = np.array(A, dtype=object)
            n = M.shape[0]
            G = [
                [Fraction(int(sum(int(M[k, i]) * int(M[k, j]) for k in range(n))), n) for j in range(M.shape[1])]
                for i in range(M.shape[1])
            ]
            rep = l1_sensitivity(G, ConeSpec(spec.s, spec.alpha, 1), "rational")
            if rep.constant == 0:
                return Decision(status="fails", gamma=gamma, constant=Fraction(0), witness=rep.witness)
            if lower_bound is not None and lower_bound >= gamma:
                return Decision(status="holds", gamma=gamma, lower_bound=lower_bound)
            return Decision(status="indeterminate", gamma=gamma, lower_bound=lower_bound)

        A = as_array(matrix)
        fn = re_constant if property == "re" else compatibility_constant
        rep = fn(A, spec)
        lower = _sigma_min_lower_bound(A) if lower_bound is None else lower_bound
        if property != "re":
            pass  # sqrt(s)|Av|_2/|v_S|_1 >= |Av|_2/|v_S|_2 so the same bound is valid
        if lower >= gamma:
            return Decision(status="holds", gamma=gamma, lower_bound=lower, upper_bound=rep.constant)
        if rep.constant < gamma:
            return Decision(
                status="fails",
                gamma=gamma,
                lower_bound=lower,
                upper_bound=rep.constant,
                witness=rep.witness,
            )
        return Decision(status="indeterminate", gamma=gamma, lower_bound=lower, upper_bound=rep.constant)

    raise ValueError(f"decide does not support property {property!r}")
