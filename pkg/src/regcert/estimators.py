"""Unnormalized STIV estimator and its Dantzig-selector special case.

Both are l1-minimizations over the residual-correlation polytope
|Z^T (y - X beta) / n|_inf <= sigma * lambda, solved by the simplex engine
with the usual beta = beta+ - beta- splitting. The noise level sigma is
assumed known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .ensembles import PopulationModel, SamplerSpec, sample
from .lp import LinearProgram, solve
from .types import DesignMatrix, InstrumentMatrix

FEAS_TOL = 1e-8


def _l1_polytope_fit(X, Z, y, radius):
    """min |beta|_1 s.t. |Z^T(y - X beta)/n|_inf <= radius."""
    n, p = X.shape
    G = Z.T @ X / n
    r = Z.T @ y / n
    L = G.shape[0]
    c = [1.0] * (2 * p)
    cons = []
    for j in range(L):
        row = list(G[j]) + list(-G[j])
        cons.append((row, "<=", float(r[j] + radius)))
        cons.append((row, ">=", float(r[j] - radius)))
    lp = LinearProgram(c, cons, bounds=[(0, None)] * (2 * p))
    sol = solve(lp, "float")
    if sol.status != "optimal":
        raise RuntimeError(
            f"estimator LP came back {sol.status}; the constraint polytope should "
            "be nonempty for valid inputs"
        )
    x = np.asarray(sol.point, dtype=float)
    beta = x[:p] - x[p:]
    resid = np.max(np.abs(r - G @ beta))
    return beta, resid <= radius + FEAS_TOL


class StivEstimator(RegressorMixin, BaseEstimator):
    """Unnormalized self-tuning instrumental variables estimator.

    Parameters
    ----------
    A : tuning multiplier in lambda = A sqrt(2 log(L) / n).
    sigma : known noise scale.
    """

    def __init__(self, A=1.0, sigma=1.0):
        self.A = A
        self.sigma = sigma

    def _instruments(self, X, Z):
        return X if Z is None else check_array(Z)

    def fit(self, X, y, Z=None):
        X, y = check_X_y(X, y)
        Z = self._instruments(X, Z)
        if Z.shape[0] != X.shape[0]:
            raise ValueError("Z and X must have the same number of rows")
        n, L = Z.shape[0], Z.shape[1]
        self.lambda_ = self.A * math.sqrt(2 * math.log(L) / n)
        radius = self.sigma * self.lambda_
        self.coef_, self.feasible_ = _l1_polytope_fit(X, Z, y, radius)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_


class DantzigSelector(StivEstimator):
    """Dantzig selector: the Z = X special case (lambda uses log p)."""

    def fit(self, X, y, Z=None):
        if Z is not None:
            raise ValueError("DantzigSelector always uses Z = X")
        return super().fit(X, y, Z=None)


# ---------------------------------------------------------------------------
# synthetic instances and rate studies


@dataclass(frozen=True)
class RegressionInstance:
    X: DesignMatrix
    Z: InstrumentMatrix
    y: np.ndarray
    beta_true: np.ndarray | None
    sigma: float
    s: int

    def __post_init__(self):
        if len(self.y) != self.X.n:
            raise ValueError("response length must equal n")
        if self.beta_true is not None and np.count_nonzero(self.beta_true) > self.s:
            raise ValueError("beta_true has more than s nonzeros")


@dataclass(frozen=True)
class EstimateResult:
    beta_hat: np.ndarray
    lam: float
    feasible: bool
    lq_errors: dict = field(default_factory=dict)


def generate(
    model: PopulationModel,
    regime: str,
    n: int,
    s: int,
    beta_magnitude: float,
    sigma: float,
    seed: int,
) -> RegressionInstance:
    """Sample (X, Z), draw an s-sparse +-beta_magnitude coefficient vector,
    and form y = X beta + Gaussian(0, sigma^2) noise. Deterministic in seed."""
    p = model.p
    if s >= p:
        raise ValueError("need s < p")
    X, Z = sample(model, SamplerSpec(regime, seed=seed), n)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    beta = np.zeros(p)
    if s > 0:
        pos = rng.choice(p, size=s, replace=False)
        beta[pos] = beta_magnitude * rng.choice([-1.0, 1.0], size=s)
    eps = sigma * rng.standard_normal(n) if sigma > 0 else np.zeros(n)
    y = X.values @ beta + eps
    return RegressionInstance(X, Z, y, beta, sigma, s)


def _errors(beta_hat, beta_true):
    if beta_true is None:
        return {}
    d = beta_hat - beta_true
    return {
        "l1": float(np.sum(np.abs(d))),
        "l2": float(np.linalg.norm(d)),
        "linf": float(np.max(np.abs(d))),
    }


def stiv(instance: RegressionInstance, A: float) -> EstimateResult:
    est = StivEstimator(A=A, sigma=instance.sigma).fit(
        instance.X.values, instance.y, Z=instance.Z.values
    )
    return EstimateResult(est.coef_, est.lambda_, est.feasible_, _errors(est.coef_, instance.beta_true))


def dantzig(instance: RegressionInstance, A: float) -> EstimateResult:
    est = DantzigSelector(A=A, sigma=instance.sigma).fit(instance.X.values, instance.y)
    return EstimateResult(est.coef_, est.lambda_, est.feasible_, _errors(est.coef_, instance.beta_true))


def loglog_slope(ns, values) -> float | None:
    """Least-squares slope of log(values) against log(ns); None if degenerate."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 1e-6):
        return None
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(v)
    return float(np.polyfit(x, y, 1)[0])


def error_vs_n_study(
    model: PopulationModel,
    method: str,
    n_grid: list[int],
    s: int,
    A: float = 1.0,
    sigma: float = 1.0,
    beta_magnitude: float = 1.0,
    regime: str = "subgaussian",
    n_seeds: int = 20,
    base_seed: int = 0,
    q: str = "l1",
) -> dict:
    """Median estimation error per n over seeds, plus the fitted log-log slope."""
    if n_seeds < 1:
        raise ValueError("need at least one seed")
    fit = {"stiv": stiv, "dantzig": dantzig}[method]
    rows = []
    for n in n_grid:
        errs = []
        for k in range(n_seeds):
            seed_k = int(
                np.random.SeedSequence(entropy=base_seed, spawn_key=(n, k)).generate_state(1)[0]
            )
            inst = generate(model, regime, n, s, beta_magnitude, sigma, seed_k)
            errs.append(fit(inst, A).lq_errors[q])
        rows.append({"n": n, "median_error": float(np.median(errs))})
    slope = loglog_slope([r["n"] for r in rows], [r["median_error"] for r in rows])
    return {"method": method, "q": q, "rows": rows, "slope": slope}
