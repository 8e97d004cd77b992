"""Regularity-preserving data transformations with computable certificates.

The linear family covers orthogonal row maps (Z^T X invariant), concrete
cone-preserving right multiplications (permutations and positive diagonal
scalings), and inf-norm-expansive left maps on the instruments. The
additive family certifies perturbation and two-dataset averaging bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .checkers import l1_sensitivity, linf_sensitivity, lq_sensitivity
from .types import ConeSpec, as_array

KINDS = (
    "orthogonal_rows",
    "cone_preserving_right",
    "linf_expansive_left",
    "additive_perturbation",
    "averaging",
)

INF = math.inf


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    payload: np.ndarray  # M or Delta
    constants: dict = field(default_factory=dict)  # declared c, delta, s', alpha'

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        object.__setattr__(self, "payload", np.asarray(self.payload, dtype=float))
        for k, v in self.constants.items():
            if k in ("c", "delta") and not v > 0:
                raise ValueError(f"declared constant {k} must be positive")


def _check_orthogonal(M: np.ndarray):
    if M.shape[0] != M.shape[1]:
        raise ValueError("orthogonal payload must be square")
    err = np.max(np.abs(M.T @ M - np.eye(M.shape[0])))
    if err > 1e-10:
        raise ValueError(f"payload is not orthogonal (|M^T M - I|_max = {err:.3e})")


def apply(spec: TransformSpec, X, Z):
    """Apply a linear transform, asserting its hypothesis where checkable."""
    X = as_array(X)
    Z = as_array(Z)
    M = spec.payload
    if spec.kind == "orthogonal_rows":
        _check_orthogonal(M)
        X2, Z2 = M @ X, M @ Z
        drift = np.max(np.abs(Z2.T @ X2 - Z.T @ X))
        if drift > 1e-10 * max(1.0, np.max(np.abs(Z.T @ X))):
            raise AssertionError(f"orthogonal transform drifted Z^T X by {drift:.3e}")
        return X2, Z2
    if spec.kind == "cone_preserving_right":
        return X @ M, Z
    if spec.kind == "linf_expansive_left":
        # Z' such that Z'^T X = M Z^T X, matching the certificate below
        return X, Z @ M.T
    raise ValueError(f"apply expects a linear transform kind, got {spec.kind!r}")


def induced_norm(M, from_q, to_q=INF) -> float:
    """|M|_{q, inf} for q in {1, 2, inf}: exact closed forms."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if to_q != INF:
        raise ValueError("only the -> inf induced norms are supported")
    if from_q == 1:
        return float(np.max(np.abs(M)))
    if from_q == 2:
        return float(np.max(np.linalg.norm(M, axis=1)))
    if from_q == INF:
        return float(np.max(np.sum(np.abs(M), axis=1)))
    raise ValueError("from_q must be 1, 2 or inf")


def diagonal_scaling_certificate(D: np.ndarray, spec: ConeSpec) -> dict:
    """Cone-preserving constants for a positive diagonal right scaling.

    Dv stays in C(s, alpha * dmax/dmin) and |Dv|_q >= dmin |v|_q, so the
    transformed pair keeps sensitivity down to c = dmin times the constant
    at the widened cone.
    """
    d = np.diag(np.atleast_2d(D)) if np.asarray(D).ndim == 2 else np.asarray(D, dtype=float)
    if np.any(d <= 0):
        raise ValueError("diagonal scaling must be positive")
    dmin, dmax = float(d.min()), float(d.max())
    return {
        "c": dmin,
        "s_prime": spec.s,
        "alpha_prime": float(spec.alpha) * dmax / dmin,
    }


def _exact_sensitivity(Psi, spec: ConeSpec):
    if spec.q == 1:
        return l1_sensitivity(Psi, spec)
    if spec.q == INF:
        return linf_sensitivity(Psi, spec)
    raise ValueError("exact certificates need q in {1, inf}")


def perturbation_certificate(Psi, Delta, spec: ConeSpec) -> dict:
    """Additive perturbation: sensitivity drops by at most s^{1/q} |Delta|_{q,inf}."""
    Psi = as_array(Psi)
    Delta = as_array(Delta)
    if Psi.shape != Delta.shape:
        raise ValueError("Psi and Delta shapes differ")
    q = spec.q
    before = _exact_sensitivity(Psi, spec)
    s_pow = spec.s ** (1.0 / q) if q != INF else 1.0
    delta_eff = s_pow * induced_norm(Delta, q)
    observed = _exact_sensitivity(Psi + Delta, spec)
    gamma_before = float(before.constant)
    guaranteed = gamma_before - delta_eff
    obs = float(observed.constant)
    if obs < guaranteed - 1e-9:
        raise AssertionError(
            f"perturbation bound violated: observed {obs} < guaranteed {guaranteed}"
        )
    return {
        "gamma_before": gamma_before,
        "delta_eff": delta_eff,
        "guaranteed_after": guaranteed,
        "observed_after": obs,
    }


def averaging_certificate(X1, Z1, X2, Z2, spec: ConeSpec) -> dict:
    """Average two datasets; sensitivity of the average is certified from
    the first dataset's constant and the three cross-deviation norms."""
    X1, Z1, X2, Z2 = map(as_array, (X1, Z1, X2, Z2))
    if X1.shape != X2.shape or Z1.shape != Z2.shape or X1.shape[0] != Z1.shape[0]:
        raise ValueError("dataset shapes differ")
    n = X1.shape[0]
    q = spec.q
    s_pow = spec.s ** (1.0 / q) if q != INF else 1.0
    psi1 = Z1.T @ X1 / n
    gamma1 = float(_exact_sensitivity(psi1, spec).constant)
    eps = induced_norm(Z1.T @ (X2 - X1) / n, q)
    delta = induced_norm((Z2 - Z1).T @ X1 / n, q)
    c = induced_norm((Z2 - Z1).T @ (X2 - X1) / n, q)
    bound = gamma1 - s_pow * (2 * eps + 2 * delta + c) / 4
    Xa, Za = (X1 + X2) / 2, (Z1 + Z2) / 2
    observed = float(_exact_sensitivity(Za.T @ Xa / n, spec).constant)
    if observed < bound - 1e-9:
        raise AssertionError(f"averaging bound violated: {observed} < {bound}")
    return {
        "gamma1": gamma1,
        "eps": eps,
        "delta": delta,
        "c": c,
        "bound": bound,
        "observed": observed,
    }
