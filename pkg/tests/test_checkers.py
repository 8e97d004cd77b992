"""Regularity-constant checkers against independent oracles.

The exact sensitivity values are cross-checked with scipy's interior-point/
HiGHS LP solver (an implementation the package does not share code with),
with analytic closed forms, and with hypothesis invariants.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from regcert import (
    ConeSpec,
    compatibility_constant,
    decide,
    incoherence_constant,
    l1_sensitivity,
    linf_sensitivity,
    lq_sensitivity,
    re_constant,
    rip_constant,
    rip_constant_from_gram,
    spark,
)
from regcert.linalg import cone_membership

INF = math.inf


# ---------------------------------------------------------------------------
# independent scipy oracle for the exact l1 sensitivity


def scipy_l1_sensitivity(Psi, s, alpha):
    """min over cone, |v|_1 = 1 of s * |Psi v|_inf via one scipy LP per (S, eps)."""
    Psi = np.asarray(Psi, dtype=float)
    L, p = Psi.shape
    best = INF
    for S in itertools.combinations(range(p), s):
        Sc = [j for j in range(p) if j not in S]
        for eps_bits in range(2 ** (p - 1)):
            eps = np.ones(p)
            for i in range(1, p):
                if (eps_bits >> (i - 1)) & 1:
                    eps[i] = -1.0
            # vars: u (p, >=0), t; v = eps * u
            Pe = Psi * eps  # column-scaled
            A_ub = np.vstack([np.hstack([Pe, -np.ones((L, 1))]),
                              np.hstack([-Pe, -np.ones((L, 1))])])
            b_ub = np.zeros(2 * L)
            cone_row = np.zeros(p + 1)
            cone_row[Sc] = 1.0
            cone_row[list(S)] = -alpha
            A_ub = np.vstack([A_ub, cone_row])
            b_ub = np.append(b_ub, 0.0)
            A_eq = np.ones((1, p + 1))
            A_eq[0, -1] = 0.0
            c = np.zeros(p + 1)
            c[-1] = 1.0
            r = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                        bounds=[(0, None)] * p + [(0, None)], method="highs")
            if r.status == 0:
                best = min(best, r.fun)
    return s * best


@pytest.mark.parametrize("seed", range(6))
def test_l1_matches_scipy_oracle(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 5))
    L = int(rng.integers(2, 5))
    s = int(rng.integers(1, p))
    alpha = float(rng.choice([0.5, 1.0, 2.0]))
    Psi = np.round(rng.standard_normal((L, p)), 2)
    ours = l1_sensitivity(Psi, ConeSpec(s, alpha, 1)).constant
    oracle = scipy_l1_sensitivity(Psi, s, alpha)
    assert ours == pytest.approx(oracle, abs=1e-7)


# ---------------------------------------------------------------------------
# closed forms  [oracle values frozen from the analytic formula
#  gamma_1(c I_p) = c/(1+alpha) when p - s >= alpha s]


class TestClosedForms:
    def test_identity(self):
        assert l1_sensitivity(np.eye(6), ConeSpec(2, 1, 1)).constant == pytest.approx(0.5)

    def test_scaled_identity(self):
        assert l1_sensitivity(3 * np.eye(5), ConeSpec(2, 1, 1)).constant == pytest.approx(1.5)

    def test_identity_rational(self):
        rows = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
        rep = l1_sensitivity(rows, ConeSpec(1, 1, 1), arithmetic="rational")
        assert rep.constant == Fraction(1, 2)
        assert rep.arithmetic == "rational"

    def test_alpha_dependence(self):
        # gamma = 1/(1+alpha) for identity when p - s >= alpha s
        for alpha in (0.5, 1.0, 2.0):
            got = l1_sensitivity(np.eye(8), ConeSpec(2, alpha, 1)).constant
            assert got == pytest.approx(1 / (1 + alpha), abs=1e-9)

    def test_linf_identity(self):
        assert linf_sensitivity(np.eye(5), ConeSpec(2, 1, INF)).constant == pytest.approx(1.0)
        assert linf_sensitivity(2 * np.eye(5), ConeSpec(2, 1, INF)).constant == pytest.approx(2.0)

    def test_kernel_vector_gives_zero(self):
        # duplicated coordinate: v = (1, -1, 0)/2 is in the cone and kernel
        Psi = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        assert l1_sensitivity(Psi, ConeSpec(1, 1, 1)).constant == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# invariants


@st.composite
def small_psi(draw):
    p = draw(st.integers(2, 4))
    L = draw(st.integers(1, 4))
    entries = draw(
        st.lists(st.integers(-3, 3), min_size=L * p, max_size=L * p)
    )
    return np.array(entries, dtype=float).reshape(L, p)


class TestInvariants:
    @settings(max_examples=15, deadline=None)
    @given(small_psi(), st.integers(1, 2), st.sampled_from([1, 2]))
    def test_homogeneity(self, Psi, s, c):
        if s >= Psi.shape[1]:
            s = Psi.shape[1] - 1
        spec = ConeSpec(s, 1, 1)
        base = l1_sensitivity(Psi, spec).constant
        scaled = l1_sensitivity(c * Psi, spec).constant
        assert scaled == pytest.approx(c * base, abs=1e-8)

    @settings(max_examples=15, deadline=None)
    @given(small_psi(), st.randoms(use_true_random=False))
    def test_column_permutation_invariance(self, Psi, rnd):
        p = Psi.shape[1]
        spec = ConeSpec(1, 1, 1)
        perm = list(range(p))
        rnd.shuffle(perm)
        a = l1_sensitivity(Psi, spec).constant
        b = l1_sensitivity(Psi[:, perm], spec).constant
        assert a == pytest.approx(b, abs=1e-8)

    @settings(max_examples=15, deadline=None)
    @given(small_psi())
    def test_alpha_monotone(self, Psi):
        # wider cone (larger alpha) -> minimum over a superset -> no larger
        spec_narrow = ConeSpec(1, Fraction(1, 2), 1)
        spec_wide = ConeSpec(1, 2, 1)
        assert (
            l1_sensitivity(Psi, spec_wide).constant
            <= l1_sensitivity(Psi, spec_narrow).constant + 1e-9
        )

    @settings(max_examples=10, deadline=None)
    @given(small_psi(), st.integers(1, 2))
    def test_witness_reproduces_ratio_and_lives_in_cone(self, Psi, s):
        p = Psi.shape[1]
        s = min(s, p - 1)
        spec = ConeSpec(s, 1, 1)
        rep = l1_sensitivity(Psi, spec)
        v = np.asarray(rep.witness, dtype=float)
        assert cone_membership(v, s, 1.0)[0]
        assert np.abs(v).sum() == pytest.approx(1.0, abs=1e-7)
        assert s * np.max(np.abs(Psi @ v)) == pytest.approx(float(rep.constant), abs=1e-7)

    @settings(max_examples=10, deadline=None)
    @given(small_psi(), st.integers(1, 2))
    def test_rational_float_agree(self, Psi, s):
        p = Psi.shape[1]
        s = min(s, p - 1)
        spec = ConeSpec(s, 1, 1)
        f = l1_sensitivity(Psi, spec).constant
        rows = [[Fraction(int(v)) for v in row] for row in Psi]
        r = l1_sensitivity(rows, spec, arithmetic="rational").constant
        assert f == pytest.approx(float(r), abs=1e-8)


# ---------------------------------------------------------------------------
# spark / incoherence / RIP


class TestSpark:
    def test_full_rank_convention(self):
        assert spark(np.eye(4)) == 5

    def test_zero_column(self):
        X = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert spark(X) == 1

    def test_duplicate_column(self):
        X = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        assert spark(X) == 2

    def test_all_ones_dependency(self):
        X = np.array([[1, 0, 1], [0, 1, 1]], dtype=float)
        assert spark(X) == 3

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_exhaustive_rank_oracle(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.integers(-2, 3, size=(3, 5)).astype(float)
        got = spark(X)
        oracle = 5 + 1
        for k in range(1, 6):
            found = False
            for S in itertools.combinations(range(5), k):
                if np.linalg.matrix_rank(X[:, S]) < k:
                    oracle = k
                    found = True
                    break
            if found:
                break
        assert got == oracle


class TestIncoherenceRip:
    def test_orthonormal_incoherence_zero(self):
        assert incoherence_constant(np.eye(5)) == pytest.approx(0.0)

    def test_duplicate_column_incoherence_one(self):
        X = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 1.0]])
        assert incoherence_constant(X) == pytest.approx(1.0)

    @pytest.mark.parametrize("s", [2, 3, 4])
    @pytest.mark.parametrize("rho", [0.1, 0.3])
    def test_equal_correlation_rip(self, s, rho):
        p = 6
        G = (1 - rho) * np.eye(p) + rho * np.ones((p, p))
        assert rip_constant_from_gram(G, s).constant == pytest.approx((s - 1) * rho, abs=1e-8)

    def test_identity_rip_zero(self):
        assert rip_constant_from_gram(np.eye(5), 2).constant == pytest.approx(0.0, abs=1e-12)

    def test_rip_from_sample_matrix(self):
        # X with unit-norm orthogonal columns scaled to sqrt(n)
        n = 4
        X = math.sqrt(n) * np.eye(n)
        assert rip_constant(X, 2).constant == pytest.approx(0.0, abs=1e-10)


# ---------------------------------------------------------------------------
# RE / compatibility (multistart upper bounds with certified floors)


class TestReCompat:
    def test_identity_re_is_one(self):
        rep = re_constant(np.eye(5), ConeSpec(2, 1, 1))
        assert rep.constant == pytest.approx(1.0, abs=1e-6)

    def test_identity_compat_at_least_one(self):
        rep = compatibility_constant(np.eye(5), ConeSpec(2, 1, 1))
        assert rep.constant >= 1.0 - 1e-6

    def test_upper_bound_property(self):
        # the reported value is attained by its witness, hence a true upper bound
        rng = np.random.default_rng(3)
        A = rng.standard_normal((6, 5)) / math.sqrt(6)
        spec = ConeSpec(2, 1, 1)
        rep = re_constant(A, spec)
        v = np.asarray(rep.witness, dtype=float)
        assert cone_membership(v, 2, 1.0)[0]
        S = sorted(np.argsort(-np.abs(v))[:2])
        ratio = np.linalg.norm(A @ v) / np.linalg.norm(v[S])
        assert float(rep.constant) == pytest.approx(ratio, abs=1e-7)

    def test_two_block_witness_found(self):
        # v = (1,-1,0,...)/sqrt(2) nearly annuls the correlated block
        s = 3
        rho = 1 - 1 / s
        p = s + 1
        Sigma = np.eye(p)
        Sigma[0, 1] = Sigma[1, 0] = rho
        w, V = np.linalg.eigh(Sigma)
        root = V @ np.diag(np.sqrt(w)) @ V.T
        rep = re_constant(root, ConeSpec(s, 1, 1))
        assert float(rep.constant) <= math.sqrt(1 / s) + 1e-6

    def test_holder_chain_at_witness(self):
        # |Gv|_inf |v|_1 >= v'Gv = |Xv|_2^2/n ties the sensitivity of the
        # Gram to the restricted eigenvalue at any cone point
        rng = np.random.default_rng(5)
        X = rng.standard_normal((8, 4))
        n = 8
        G = X.T @ X / n
        spec = ConeSpec(2, 1, 1)
        rep = l1_sensitivity(G, spec)
        v = np.asarray(rep.witness, dtype=float)
        lhs = np.max(np.abs(G @ v)) * np.abs(v).sum()
        rhs = np.linalg.norm(X @ v) ** 2 / n
        assert lhs >= rhs - 1e-9


# ---------------------------------------------------------------------------
# lq for 1 < q < inf: certified sandwich


class TestLqBounds:
    def test_bounds_sandwich(self):
        spec = ConeSpec(2, 1, 2)
        rep = lq_sensitivity(np.eye(6), spec)
        lower = rep.extra["lower_bound"]
        assert rep.mode == "upper_bound"
        assert lower <= float(rep.constant) + 1e-9
        assert lower > 0

    def test_witness_is_feasible_upper_bound(self):
        rng = np.random.default_rng(7)
        Psi = rng.standard_normal((4, 5))
        spec = ConeSpec(2, 1, 2)
        rep = lq_sensitivity(Psi, spec)
        v = np.asarray(rep.witness, dtype=float)
        assert cone_membership(v, 2, 1.0)[0]
        ratio = math.sqrt(2) * np.max(np.abs(Psi @ v)) / np.linalg.norm(v)
        assert float(rep.constant) == pytest.approx(ratio, rel=1e-6)


# ---------------------------------------------------------------------------
# decide


class TestDecide:
    def test_exact_holds_fails(self):
        spec = ConeSpec(2, 1, 1)
        assert decide("lq", np.eye(6), spec, 0.4).status == "holds"
        assert decide("lq", np.eye(6), spec, 0.6).status == "fails"

    def test_rational_decision_exact_boundary(self):
        rows = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
        spec = ConeSpec(1, 1, 1)
        assert decide("lq", rows, spec, Fraction(1, 2), "rational").status == "holds"
        num = Fraction(1, 2) + Fraction(1, 10**12)
        assert decide("lq", rows, spec, num, "rational").status == "fails"

    def test_re_float_holds_via_sigma_min(self):
        assert decide("re", np.eye(5), ConeSpec(2, 1, 1), 0.9).status == "holds"

    def test_re_float_fails_via_witness(self):
        # rank-deficient: a cone vector in the kernel
        A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        d = decide("re", A, ConeSpec(1, 1, 1), 0.5)
        assert d.status == "fails"

    def test_indeterminate_raises_on_holds_access(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((4, 6))  # singular, but multistart bound > 0
        d = decide("re", A, ConeSpec(1, 1, 1), 1e-9)
        if d.status == "indeterminate":
            with pytest.raises(ValueError):
                _ = d.holds
