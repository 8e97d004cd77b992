"""Shared value types: design/instrument matrices, cone specs, cross-covariances."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np


def _check_finite_2d(entries, name):
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class DesignMatrix:
    """Dense n x p covariate matrix.

    ``integral`` asserts that every entry is exactly an integer; the
    spark reduction requires it so that rational arithmetic stays exact.
    """

    values: np.ndarray
    integral: bool = False

    def __post_init__(self):
        a = _check_finite_2d(self.values, "design matrix")
        if self.integral and not np.array_equal(a, np.rint(a)):
            raise ValueError("integral matrix has non-integer entries")
        object.__setattr__(self, "values", a)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def int_values(self) -> np.ndarray:
        if not self.integral:
            raise ValueError("matrix is not flagged integral")
        return np.rint(self.values).astype(object)


@dataclass(frozen=True)
class InstrumentMatrix:
    """Dense n x L instrument matrix, row-matched to a DesignMatrix."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_finite_2d(self.values, "instrument matrix"))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def L(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ConeSpec:
    """Parameters (s, alpha, q) of the sparsity cone and sensitivity norm.

    q may be ``math.inf``. alpha and s may be exact Fractions/ints when used
    on the rational path.
    """

    s: int
    alpha: object = 1
    q: object = 1

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise ValueError("s must be an integer >= 1")
        object.__setattr__(self, "s", int(self.s))
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not (self.q >= 1):
            raise ValueError("q must be >= 1 (inf allowed)")

    def validate_for_width(self, p: int):
        if self.s >= p:
            raise ValueError(f"s={self.s} must be < number of columns p={p}")

    @property
    def is_rational(self) -> bool:
        return isinstance(self.alpha, (int, Fraction))


@dataclass(frozen=True)
class CrossCovariance:
    """L x p cross-covariance: population Psi = E Z X^T or sample Z^T X / n."""

    values: np.ndarray
    sample: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _check_finite_2d(self.values, "cross-covariance"))

    @property
    def L(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @staticmethod
    def from_sample(Z, X) -> "CrossCovariance":
        Z = np.asarray(Z, dtype=float)
        X = np.asarray(X, dtype=float)
        if Z.shape[0] != X.shape[0]:
            raise ValueError("Z and X must have the same number of rows")
        n = X.shape[0]
        return CrossCovariance(Z.T @ X / n, sample=True)


def as_array(m) -> np.ndarray:
    """Coerce a DesignMatrix / InstrumentMatrix / CrossCovariance / ndarray to ndarray."""
    if isinstance(m, (DesignMatrix, InstrumentMatrix, CrossCovariance)):
        return m.values
    return _check_finite_2d(m, "matrix")
