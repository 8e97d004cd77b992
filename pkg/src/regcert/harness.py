"""Monte Carlo validation of the sample-sensitivity and tail-bound claims.

Runs are deterministic: every trial derives its generator from
(base_seed, n, trial) through a SeedSequence, so records are reproducible
and order-independent. Theoretical sample-size thresholds are reported,
never enforced; the experiments sweep n and locate empirical thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .checkers import l1_sensitivity, linf_sensitivity
from .ensembles import PopulationModel, SamplerSpec, population_psi, sample
from .types import ConeSpec

INF = math.inf
BERNSTEIN_C = 1.0 / (8.0 * math.e**2)
PSI2_TRUNCATION = 20


# ---------------------------------------------------------------------------
# sub-gaussian / moment constants for the canonical laws


def gaussian_abs_moment(k: int) -> float:
    """E|N(0,1)|^k = 2^(k/2) Gamma((k+1)/2) / sqrt(pi)."""
    return math.exp(0.5 * k * math.log(2) + math.lgamma((k + 1) / 2) - 0.5 * math.log(math.pi))


def student_t_abs_moment(nu: int, k: int) -> float:
    """E|T_nu|^k for k < nu."""
    if k >= nu:
        raise ValueError("moment does not exist")
    return math.exp(
        0.5 * k * math.log(nu)
        + math.lgamma((k + 1) / 2)
        + math.lgamma((nu - k) / 2)
        - 0.5 * math.log(math.pi)
        - math.lgamma(nu / 2)
    )


def psi2_norm(law: str) -> float:
    """sup_{1<=k<=20} k^(-1/2) (E|X|^k)^(1/k) for the canonical scalar laws."""
    if law == "gaussian":
        return max(
            gaussian_abs_moment(k) ** (1.0 / k) / math.sqrt(k) for k in range(1, PSI2_TRUNCATION + 1)
        )
    if law == "rademacher":
        return 1.0  # all absolute moments are 1; sup at k = 1
    raise ValueError(f"no psi2 convention for law {law!r}")


def regime_K(model: PopulationModel, regime: str, r: int = 1) -> float:
    """The per-entry deviation constant K for the regime's tail bound."""
    from .ensembles import covariance_sqrt

    Sigma = population_psi(model).values
    root = covariance_sqrt(Sigma)
    if regime == "subgaussian":
        # marginal <X, x> ~ N(0, x' Sigma x): vector psi2 = sqrt(lmax) * scalar psi2
        lmax = float(np.linalg.eigvalsh(Sigma).max())
        psi2 = math.sqrt(lmax) * psi2_norm("gaussian")
        return 4.0 * psi2 * psi2
    if regime == "bounded":
        # coordinates bounded by the row l1 norms of the covariance root
        C = float(np.max(np.sum(np.abs(root), axis=1)))
        return 2.0 * C * C
    raise ValueError(f"no exponential-tail K for regime {regime!r}")


def moment_constants(model: PopulationModel, r: int) -> tuple[float, float]:
    """(C_x, C_z) = 4r-th moment bounds for the standardized-t regime."""
    from .ensembles import covariance_sqrt

    nu = 4 * r + 2
    k = 4 * r
    base = student_t_abs_moment(nu, k) / (nu / (nu - 2)) ** (k / 2)  # standardized scalar
    root = covariance_sqrt(population_psi(model).values)
    rowsum = float(np.max(np.sum(np.abs(root), axis=1)))
    C = (rowsum**k) * base  # Minkowski: ||sum a_j t_j||_{4r} <= sum |a_j| ||t||_{4r}
    return C, C


def tail_bound(regime: str, L: int, p: int, n: int, t: float, K: float | None = None,
               r: int = 1, Cx: float = 1.0, Cz: float = 1.0) -> float:
    """Theoretical upper bound on P(||Psi - Psi_hat||_max >= t), clamped to 1."""
    if t <= 0:
        return 1.0
    if regime in ("subgaussian", "bounded"):
        b = 2.0 * L * p * math.exp(-BERNSTEIN_C * n * min(t / K, (t / K) ** 2))
    elif regime == "bounded_moment":
        b = L * p * (2**(2 * r)) * (r ** (2 * r)) * math.sqrt(Cx * Cz) / (t ** (2 * r) * n**r)
    else:
        raise ValueError(f"no tail bound for regime {regime!r}")
    return min(1.0, b)


# ---------------------------------------------------------------------------
# experiment runner


@dataclass(frozen=True)
class ExperimentConfig:
    model: PopulationModel
    regime: str
    spec: ConeSpec
    delta: float
    n_grid: tuple
    trials: int = 20
    base_seed: int = 0
    a: float = 1.0  # probability exponent in 1 - (2pL)^(-a)
    r: int = 1

    def __post_init__(self):
        if self.trials < 20:
            raise ValueError("need at least 20 trials")
        grid = tuple(int(n) for n in self.n_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
            raise ValueError("n_grid must be strictly increasing and nonempty")
        object.__setattr__(self, "n_grid", grid)
        if self.spec.q not in (1, INF):
            raise ValueError("harness needs exact sensitivity, q in {1, inf}")


@dataclass(frozen=True)
class TrialRecord:
    n: int
    seed: int
    deviation: float
    sample_gamma: float
    success: bool
    witness: tuple = ()

    def __post_init__(self):
        if self.deviation < 0:
            raise ValueError("deviation must be nonnegative")


def _exact_sensitivity(Psi, spec: ConeSpec):
    return l1_sensitivity(Psi, spec) if spec.q == 1 else linf_sensitivity(Psi, spec)


def _trial_seed(base_seed: int, n: int, k: int) -> int:
    return int(np.random.SeedSequence(entropy=base_seed, spawn_key=(n, k)).generate_state(1)[0])


def population_gamma(model: PopulationModel, spec: ConeSpec) -> float:
    return float(_exact_sensitivity(population_psi(model).values, spec).constant)


def run(config: ExperimentConfig) -> tuple[list[TrialRecord], dict]:
    """Per (n, trial): sample, form Psi_hat, record deviation, exact sample
    sensitivity and the success event sample_gamma >= gamma - delta."""
    Psi = population_psi(config.model).values
    gamma = population_gamma(config.model, config.spec)
    if not config.delta < gamma:
        raise ValueError(f"delta = {config.delta} must be below the population gamma = {gamma}")
    records = []
    for n in config.n_grid:
        for k in range(config.trials):
            seed = _trial_seed(config.base_seed, n, k)
            X, Z = sample(config.model, SamplerSpec(config.regime, r=config.r, seed=seed), n)
            Psi_hat = Z.values.T @ X.values / n
            dev = float(np.max(np.abs(Psi - Psi_hat)))
            rep = _exact_sensitivity(Psi_hat, config.spec)
            records.append(
                TrialRecord(
                    n=n,
                    seed=seed,
                    deviation=dev,
                    sample_gamma=float(rep.constant),
                    success=float(rep.constant) >= gamma - config.delta,
                    witness=tuple(float(v) for v in rep.witness),
                )
            )
    records.sort(key=lambda r: (r.n, r.seed))
    summary = summarize(records, gamma, config.delta)
    summary["theoretical_n"] = theoretical_sample_size(config)
    return records, summary


def summarize(records: list[TrialRecord], gamma: float, delta: float) -> dict:
    ns = sorted({r.n for r in records})
    per_n = []
    for n in ns:
        rs = [r for r in records if r.n == n]
        per_n.append(
            {
                "n": n,
                "success_rate": float(np.mean([r.success for r in rs])),
                "median_deviation": float(np.median([r.deviation for r in rs])),
                "median_sample_gamma": float(np.median([r.sample_gamma for r in rs])),
            }
        )
    med = [row["median_deviation"] for row in per_n]
    slope = None
    if len(ns) >= 2 and all(m > 0 for m in med):
        slope = float(np.polyfit(np.log(ns), np.log(med), 1)[0])
    return {
        "population_gamma": gamma,
        "delta": delta,
        "per_n": per_n,
        "deviation_slope": slope,
    }


def theoretical_sample_size(config: ExperimentConfig) -> float | None:
    """The proof's sufficient n (reported, not enforced: it exceeds desk scale)."""
    model, spec = config.model, config.spec
    p = model.p
    L = population_psi(model).L
    alpha = float(spec.alpha)
    if config.regime in ("subgaussian", "bounded"):
        K = regime_K(model, config.regime)
        return (
            math.log(2 * p * L)
            * (config.a + 1)
            / BERNSTEIN_C
            * max(1.0, K**2 * (1 + alpha) ** 2 * spec.s**2 / config.delta**2)
        )
    return None


# ---------------------------------------------------------------------------
# tail-bound audit


def deviation_tail_check(
    model: PopulationModel,
    regime: str,
    n_values,
    t_values,
    trials: int,
    base_seed: int = 0,
    r: int = 1,
) -> list[dict]:
    """Empirical P(||Psi - Psi_hat||_max >= t) next to the regime's bound."""
    Psi = population_psi(model).values
    L, p = Psi.shape
    if regime in ("subgaussian", "bounded"):
        K = regime_K(model, regime)
        Cx = Cz = 1.0
    else:
        K = None
        Cx, Cz = moment_constants(model, r)
    rows = []
    for n in n_values:
        devs = []
        for k in range(trials):
            seed = _trial_seed(base_seed, n, k)
            X, Z = sample(model, SamplerSpec(regime, r=r, seed=seed), n)
            devs.append(float(np.max(np.abs(Psi - Z.values.T @ X.values / n))))
        devs = np.asarray(devs)
        for t in t_values:
            emp = float(np.mean(devs >= t))
            bound = tail_bound(regime, L, p, n, t, K=K, r=r, Cx=Cx, Cz=Cz)
            rows.append(
                {
                    "regime": regime,
                    "n": int(n),
                    "t": float(t),
                    "empirical": emp,
                    "bound": bound,
                    "valid": emp <= bound,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# mixture experiment (Theorem on mixed tails)


def mixture_study(
    model1: PopulationModel,
    model2: PopulationModel,
    p1: float,
    spec: ConeSpec,
    delta: float,
    nu: float,
    n_grid,
    trials: int,
    base_seed: int = 0,
    children: tuple = ("subgaussian", "bounded"),
) -> tuple[list[TrialRecord], dict]:
    """Mixture sampling run: success means the sample sensitivity stays above
    gamma - (delta + nu)(1 + alpha). The closeness hypothesis
    ||Psi1 - Psi2||_max <= delta / s is validated up front, not assumed."""
    Psi1 = population_psi(model1).values
    Psi2 = population_psi(model2).values
    closeness = float(np.max(np.abs(Psi1 - Psi2)))
    if closeness > delta / spec.s + 1e-12:
        raise ValueError(
            f"mixture hypothesis violated: ||Psi1 - Psi2||_max = {closeness} > delta/s = {delta / spec.s}"
        )
    gamma = float(_exact_sensitivity(Psi1, spec).constant)
    threshold = gamma - (delta + nu) * (1 + float(spec.alpha))
    records = []
    for n in n_grid:
        for k in range(trials):
            seed = _trial_seed(base_seed, n, k)
            sampler = SamplerSpec("mixture", p1=p1, children=children, seed=seed)
            X, Z = sample(model1, sampler, n, model2=model2)
            Psi_hat = Z.values.T @ X.values / n
            rep = _exact_sensitivity(Psi_hat, spec)
            g = float(rep.constant)
            records.append(
                TrialRecord(
                    n=int(n),
                    seed=seed,
                    deviation=float(np.max(np.abs(Psi1 - Psi_hat))),
                    sample_gamma=g,
                    success=g >= threshold,
                    witness=tuple(float(v) for v in rep.witness),
                )
            )
    records.sort(key=lambda r: (r.n, r.seed))
    summary = summarize(records, gamma, delta)
    summary["threshold"] = threshold
    summary["closeness"] = closeness
    return records, summary
