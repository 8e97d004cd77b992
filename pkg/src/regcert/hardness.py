"""Spark-to-regularity reduction in exact rational arithmetic.

Given an integral matrix and a sparsity size, the reduction picks
(alpha, gamma) so small that the regularity property holds exactly when
the spark exceeds s. Everything on this path is a Python int or Fraction;
a float anywhere would sit far below the gammas involved (2^-30 and down),
so the float LP mode is refused outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .checkers import Decision, decide, l1_sensitivity, spark
from .lp import LpError
from .types import ConeSpec, DesignMatrix

PROPERTIES = ("re", "compatibility", "lq_sensitivity")


def ceil_log2(x: int) -> int:
    if x < 1:
        raise ValueError("ceil_log2 needs a positive integer")
    return (x - 1).bit_length()


@dataclass(frozen=True)
class ReductionParams:
    property: str
    n: int
    p: int
    M: int
    s: int
    alpha: Fraction
    gamma: Fraction
    bit_size: int

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "n": self.n,
            "p": self.p,
            "M": self.M,
            "s": self.s,
            "alpha": f"{self.alpha.numerator}/{self.alpha.denominator}",
            "gamma": f"{self.gamma.numerator}/{self.gamma.denominator}",
            "bit_size": self.bit_size,
        }


def _require_integral(X: DesignMatrix) -> np.ndarray:
    if not isinstance(X, DesignMatrix) or not X.integral:
        raise ValueError("the reduction requires an integral DesignMatrix")
    return X.int_values()


def reduction_params(X: DesignMatrix, s: int, property: str) -> ReductionParams:
    """Exact (alpha, gamma) making the property decision equivalent to spark <= s."""
    if property not in PROPERTIES:
        raise ValueError(f"unknown property {property!r}")
    M_int = _require_integral(X)
    n, p = M_int.shape
    if not 0 < s < p:
        raise ValueError("need 0 < s < p")
    M = int(max(abs(int(v)) for v in M_int.ravel()))
    if M < 1:
        raise ValueError("max absolute entry must be >= 1")
    k = ceil_log2(n * p * M)
    alpha = Fraction(1, 2 ** (2 * n * k))
    if property == "lq_sensitivity":
        gamma = Fraction(1, 2 ** (5 * n * k))
        bit_size = 5 * n * k
    else:
        gamma = alpha
        bit_size = 2 * n * k
    input_bits = n * p + ceil_log2(M) if M > 1 else n * p
    assert bit_size <= 5 * (input_bits + 2) ** 2, "parameter encoding is not polynomial-size"
    return ReductionParams(property, n, p, M, s, alpha, gamma, bit_size)


def lemma_bounds(X: DesignMatrix, s: int) -> tuple[Fraction, Fraction]:
    """(operator-norm upper bound, lambda_min lower bound) as exact rationals.

    The norm bound 2^ceil(log2(sqrt(np) M)) always holds; the lambda_min
    bound for s-column submatrices is valid only when spark(X) > s.
    """
    M_int = _require_integral(X)
    n, p = M_int.shape
    M = int(max(abs(int(v)) for v in M_int.ravel()))
    if M < 1:
        raise ValueError("max absolute entry must be >= 1")
    # smallest e with 2^(2e) >= n p M^2, i.e. e = ceil(log2(sqrt(np) M))
    e = 0
    while 4**e < n * p * M * M:
        e += 1
    norm_bound = Fraction(2**e)
    lam_bound = Fraction(1, 2 ** (2 * n * ceil_log2(n * M)))
    return norm_bound, lam_bound


def re_lower_bound(X: DesignMatrix, s: int, alpha: Fraction) -> Fraction:
    """Certified rational RE/compatibility lower bound when spark(X) > s.

    |Xv|_2 >= |v_S|_2 (sqrt(lambda_min) - ||X|| alpha sqrt(s)); we round
    sqrt(s) up to s and sqrt(lambda_min) down to the power of two from the
    lemma, keeping the bound valid and rational.
    """
    norm_bound, lam_bound = lemma_bounds(X, s)
    n = X.n
    M_int = X.int_values()
    M = int(max(abs(int(v)) for v in M_int.ravel()))
    sqrt_lam = Fraction(1, 2 ** (n * ceil_log2(n * M)))  # 2^(-n ceil(log2 nM))
    return sqrt_lam - norm_bound * alpha * s


def spark_brute_force(X: DesignMatrix) -> int:
    """Independent exhaustive-subset oracle (rational rank tests)."""
    return spark(X)


def spark_via_oracle(X: DesignMatrix, s: int, property: str) -> bool:
    """Decide spark(X) <= s with one regularity-decision query.

    Returns True iff spark <= s, i.e. iff the property with the reduction
    parameters does NOT hold. Exact rational arithmetic end to end.
    """
    params = reduction_params(X, s, property)
    spec = ConeSpec(s, params.alpha, 1)
    if property == "lq_sensitivity":
        # Z = X subproblem: Psi_hat = X^T X / n, exact rationals
        M_int = X.int_values()
        n, p = M_int.shape
        G = [
            [
                Fraction(int(sum(int(M_int[k, i]) * int(M_int[k, j]) for k in range(n))), n)
                for j in range(p)
            ]
            for i in range(p)
        ]
        rep = l1_sensitivity(G, spec, "rational")
        assert isinstance(rep.constant, Fraction)
        return rep.constant < params.gamma
    lb = re_lower_bound(X, s, params.alpha)
    d = decide(property, X, spec, params.gamma, arithmetic="rational", lower_bound=lb)
    if d.status == "indeterminate":
        raise LpError("reduction decision came back indeterminate; bounds do not separate")
    return not d.holds
