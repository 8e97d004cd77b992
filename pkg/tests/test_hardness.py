"""Reduction tests: parameters match hand computations and the oracle
decision agrees with brute-force spark on small corpora."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from regcert.hardness import (
    ceil_log2,
    reduction_params,
    spark_brute_force,
    spark_via_oracle,
)
from regcert.types import DesignMatrix


def dm(rows):
    return DesignMatrix(np.array(rows, dtype=float), integral=True)


class TestCeilLog2:
    @pytest.mark.parametrize("x,want", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)])
    def test_values(self, x, want):
        assert ceil_log2(x) == want


class TestParams:
    def test_hand_computed_small_case(self):
        # n=2, p=3, M=1: k = ceil(log2(6)) = 3; alpha = 2^-12; lq gamma = 2^-30
        X = dm([[1, 0, 1], [0, 1, 1]])
        pr = reduction_params(X, 2, "lq_sensitivity")
        assert pr.alpha == Fraction(1, 2**12)
        assert pr.gamma == Fraction(1, 2**30)

    def test_re_gamma_equals_alpha(self):
        X = dm([[1, 0, 1], [0, 1, 1]])
        pr = reduction_params(X, 1, "re")
        assert pr.gamma == pr.alpha == Fraction(1, 2**12)

    def test_bit_size_polynomial(self):
        # gamma's bit size stays within (np + log2 M)^2
        X = dm([[2, -1, 0, 1], [1, 1, -2, 0], [0, 2, 1, -1]])
        for prop in ("re", "compatibility", "lq_sensitivity"):
            pr = reduction_params(X, 2, prop)
            assert pr.bit_size <= (12 + 1) ** 2

    def test_rejects_non_integral(self):
        with pytest.raises(ValueError):
            reduction_params(np.array([[0.5]]), 1, "re")

    def test_serialization_rationals_as_strings(self):
        X = dm([[1, 0, 1], [0, 1, 1]])
        d = reduction_params(X, 2, "lq_sensitivity").to_dict()
        assert d["alpha"] == "1/4096"
        assert d["gamma"] == "1/1073741824"


class TestOracleAgreement:
    HAND_CASES = [
        ([[1, 0, 1], [0, 1, 1]], 3),          # columns sum dependency
        ([[1, 1, 0], [0, 0, 1]], 2),          # duplicated column
        ([[1, 0], [0, 1]], 3),                # full column rank -> p + 1
        ([[1, -1, 2], [2, -2, 1]], 2),        # proportional pair
    ]

    @pytest.mark.parametrize("rows,expected_spark", HAND_CASES)
    def test_brute_force_hand_values(self, rows, expected_spark):
        assert spark_brute_force(np.array(rows, dtype=float)) == expected_spark

    @pytest.mark.parametrize("rows,expected_spark", HAND_CASES)
    @pytest.mark.parametrize("prop", ["re", "compatibility", "lq_sensitivity"])
    def test_oracle_matches_brute_force(self, rows, expected_spark, prop):
        X = dm(rows)
        p = X.values.shape[1]
        for s in range(1, p):
            want = expected_spark <= s
            assert spark_via_oracle(X, s, prop) == want

    @pytest.mark.parametrize("seed", range(5))
    def test_random_small_matrices_lq_path(self, seed):
        rng = np.random.default_rng(seed)
        X = dm(rng.integers(-2, 3, size=(2, 3)))
        truth = spark_brute_force(X.values)
        for s in (1, 2):
            assert spark_via_oracle(X, s, "lq_sensitivity") == (truth <= s)


def test_brute_force_matches_rank_oracle():
    rng = np.random.default_rng(42)
    for _ in range(5):
        X = rng.integers(-2, 3, size=(3, 4)).astype(float)
        got = spark_brute_force(X)
        oracle = 5
        done = False
        for k in range(1, 5):
            for S in itertools.combinations(range(4), k):
                if np.linalg.matrix_rank(X[:, S]) < k:
                    oracle = k
                    done = True
                    break
            if done:
                break
        assert got == oracle
