"""Population covariance models, the comprehensive construction, and seeded
samplers for the sub-gaussian / bounded / bounded-moment tail regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .types import CrossCovariance, DesignMatrix, InstrumentMatrix

MODEL_KINDS = ("diagonal", "equal_correlation", "two_block", "explicit", "s_comprehensive")
REGIMES = ("subgaussian", "bounded", "bounded_moment", "mixture")
COMPREHENSIVE_BUDGET = 100_000


@dataclass(frozen=True)
class PopulationModel:
    """A named covariance Sigma (Z = X) or an explicit cross-covariance Psi."""

    kind: str
    p: int
    L: int | None = None
    d: tuple | None = None  # diagonal entries
    rho: float | None = None
    psi: np.ndarray | None = None  # explicit Psi (L x p) or Sigma (p x p)
    s: int | None = None  # s_comprehensive
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "diagonal" and (self.d is None or len(self.d) != self.p):
            raise ValueError("diagonal model needs p entries d")
        if self.kind in ("equal_correlation", "two_block") and self.rho is None:
            raise ValueError(f"{self.kind} model needs rho")
        if self.kind == "explicit":
            if self.psi is None:
                raise ValueError("explicit model needs psi")
            object.__setattr__(self, "psi", np.asarray(self.psi, dtype=float))
        if self.kind == "s_comprehensive" and self.s is None:
            raise ValueError("s_comprehensive model needs s")

    @property
    def is_covariance(self) -> bool:
        """True when Z = X and Psi is the covariance of X."""
        if self.kind == "explicit":
            P = self.psi
            return P.shape[0] == P.shape[1] and np.allclose(P, P.T)
        return self.kind not in ("s_comprehensive",)


def population_psi(model: PopulationModel) -> CrossCovariance:
    """Exact analytic Psi = E Z X^T, no sampling."""
    p = model.p
    if model.kind == "diagonal":
        return CrossCovariance(np.diag(np.asarray(model.d, dtype=float)))
    if model.kind == "equal_correlation":
        rho = model.rho
        return CrossCovariance((1 - rho) * np.eye(p) + rho * np.ones((p, p)))
    if model.kind == "two_block":
        S = np.eye(p)
        S[0, 1] = S[1, 0] = model.rho
        return CrossCovariance(S)
    if model.kind == "explicit":
        return CrossCovariance(model.psi)
    return build_s_comprehensive(p, model.s, model.c)


def covariance_sqrt(Sigma: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root; eigenvalues below -1e-10 are rejected."""
    Sigma = np.asarray(Sigma, dtype=float)
    w, V = np.linalg.eigh((Sigma + Sigma.T) / 2)
    if w.min() < -1e-10:
        raise ValueError(f"covariance is not PSD (lambda_min = {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return V @ np.diag(np.sqrt(w)) @ V.T


@dataclass(frozen=True)
class SamplerSpec:
    """Tail regime plus its constants; fully determined by the seed."""

    regime: str
    r: int = 1  # moment order: E|X|^{4r} finite (bounded_moment)
    p1: float | None = None  # mixture weight for child 1
    children: tuple | None = None  # two non-mixture regimes
    seed: int = 0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.regime == "bounded_moment" and self.r < 1:
            raise ValueError("moment order r must be >= 1")
        if self.regime == "mixture":
            if self.p1 is None or not 0 < self.p1 <= 1:
                raise ValueError("mixture weight p1 must be in (0, 1]")
            if (
                self.children is None
                or len(self.children) != 2
                or any(ch == "mixture" for ch in self.children)
            ):
                raise ValueError("mixture needs two non-mixture child regimes")


def _standardized_rows(regime: str, r: int, n: int, dim: int, rng) -> np.ndarray:
    """n iid rows with unit-variance independent coordinates of the given tail class."""
    if regime == "subgaussian":
        return rng.standard_normal((n, dim))
    if regime == "bounded":
        return rng.integers(0, 2, size=(n, dim)).astype(float) * 2.0 - 1.0
    if regime == "bounded_moment":
        nu = 4 * r + 2
        t = rng.standard_t(nu, size=(n, dim))
        return t / math.sqrt(nu / (nu - 2))
    raise ValueError(f"no direct sampler for regime {regime!r}")


def sample(
    model: PopulationModel,
    sampler: SamplerSpec,
    n: int,
    model2: PopulationModel | None = None,
) -> tuple[DesignMatrix, InstrumentMatrix]:
    """n iid rows of (X, Z); Z = X for covariance models.

    Explicit non-symmetric Psi: jointly Gaussian (X, Z) with unit marginal
    covariances and cross-block Psi (the minimal completion; rejected if the
    block covariance is not PSD). Mixture regime: per-row Bernoulli(p1)
    choice between the two children (and between model and model2 when the
    mixture components have different covariances).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(sampler.seed)

    if sampler.regime == "mixture":
        child1 = SamplerSpec(sampler.children[0], r=sampler.r)
        child2 = SamplerSpec(sampler.children[1], r=sampler.r)
        mask = rng.random(n) < sampler.p1
        X = np.empty((n, model.p))
        m2 = model2 if model2 is not None else model
        root1 = covariance_sqrt(population_psi(model).values)
        root2 = covariance_sqrt(population_psi(m2).values)
        X[mask] = _standardized_rows(child1.regime, child1.r, int(mask.sum()), model.p, rng) @ root1
        X[~mask] = _standardized_rows(child2.regime, child2.r, int((~mask).sum()), model.p, rng) @ root2
        return DesignMatrix(X), InstrumentMatrix(X)

    if model.is_covariance:
        root = covariance_sqrt(population_psi(model).values)
        X = _standardized_rows(sampler.regime, sampler.r, n, model.p, rng) @ root
        return DesignMatrix(X), InstrumentMatrix(X)

    # explicit cross-covariance: joint Gaussian completion
    if sampler.regime != "subgaussian":
        raise ValueError("explicit-Psi sampling is defined for the subgaussian regime only")
    Psi = population_psi(model).values
    L, p = Psi.shape
    block = np.block([[np.eye(p), Psi.T], [Psi, np.eye(L)]])
    root = covariance_sqrt(block)  # raises if not PSD
    W = rng.standard_normal((n, p + L)) @ root
    return DesignMatrix(W[:, :p]), InstrumentMatrix(W[:, p:])


# ---------------------------------------------------------------------------
# s-comprehensive construction


def _comprehensive_L(p: int, s: int) -> int:
    return 2 ** (s - 1) * math.comb(p, s)


def build_s_comprehensive(p: int, s: int, c: float = 1.0) -> CrossCovariance:
    """Psi with one row of +-c entries per (support, sign-class up to global flip).

    Rows are ordered lexicographically in the support, then in binary sign
    order with the first support coordinate fixed positive. The row count
    meets the counting lower bound 2^(s-1) C(p, s) with equality.
    """
    if not 1 <= s <= p:
        raise ValueError("need 1 <= s <= p")
    L = _comprehensive_L(p, s)
    if L > COMPREHENSIVE_BUDGET:
        raise ValueError(f"comprehensive construction budget exceeded (L = {L})")
    rows = np.zeros((L, p))
    i = 0
    for S in combinations(range(p), s):
        for tail in product((1.0, -1.0), repeat=s - 1):
            signs = (1.0,) + tail
            rows[i, list(S)] = c * np.array(signs)
            i += 1
    return CrossCovariance(rows)


def verify_s_comprehensive(Psi, s: int):
    """Exhaustive Definition check; returns (ok, missing (S, eps) or None)."""
    P = Psi.values if isinstance(Psi, CrossCovariance) else np.asarray(Psi, dtype=float)
    p = P.shape[1]
    if _comprehensive_L(p, s) > COMPREHENSIVE_BUDGET:
        raise ValueError("comprehensive verification budget exceeded")
    have = set()
    for w in P:
        supp = tuple(np.flatnonzero(w != 0.0))
        if len(supp) != s:
            continue
        signs = tuple(int(v) for v in np.sign(w[list(supp)]))
        if signs[0] < 0:
            signs = tuple(-v for v in signs)
        have.add((supp, signs))
    for S in combinations(range(p), s):
        for eps in product((1, -1), repeat=s):
            key = eps if eps[0] > 0 else tuple(-v for v in eps)
            if (S, key) not in have:
                return False, (S, eps)
    return True, None


def min_nonzero_magnitude(Psi) -> float:
    P = Psi.values if isinstance(Psi, CrossCovariance) else np.asarray(Psi, dtype=float)
    nz = np.abs(P[P != 0.0])
    return float(nz.min()) if nz.size else 0.0
