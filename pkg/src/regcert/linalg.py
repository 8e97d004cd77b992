"""Deterministic dense linear algebra and cone geometry.

Everything here is pure and reentrant: matrices in, values out, no shared
state. Sizes are desk scale (dimension <= 64), so a cyclic Jacobi sweep and
plain power iteration are enough and are easy to keep reproducible.
"""

from __future__ import annotations

import numpy as np

from .types import as_array

_JACOBI_MAX_SWEEPS = 100
_EIG_TOL = 1e-12
_POWER_TOL = 1e-10
_POWER_MAX_ITERS = 50_000


def gram(X, n_scale: int | None = None) -> np.ndarray:
    """X^T X / n, exactly symmetric (upper triangle computed, mirrored)."""
    X = as_array(X)
    n = X.shape[0] if n_scale is None else n_scale
    M = X.T @ X / n
    return np.triu(M) + np.triu(M, 1).T


def jacobi_eigvals(A) -> np.ndarray:
    """All eigenvalues of a symmetric matrix via cyclic Jacobi rotations.

    Rejects matrices with entry asymmetry above 1e-12. Dimension capped at 64.
    """
    A = np.array(as_array(A), dtype=float)
    m = A.shape[0]
    if A.shape[1] != m:
        raise ValueError("matrix must be square")
    if m > 64:
        raise ValueError("jacobi eigensolver capped at dimension 64")
    if np.max(np.abs(A - A.T)) > 1e-12:
        raise ValueError("matrix is not symmetric")
    A = (A + A.T) / 2
    scale = max(np.max(np.abs(A)), 1.0)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = 0.0
        for i in range(m - 1):
            for j in range(i + 1, m):
                off = max(off, abs(A[i, j]))
        if off <= _EIG_TOL * scale:
            break
        for i in range(m - 1):
            for j in range(i + 1, m):
                if abs(A[i, j]) <= _EIG_TOL * scale * 1e-3:
                    continue
                # classic Jacobi rotation annihilating A[i, j]
                theta = (A[j, j] - A[i, i]) / (2 * A[i, j])
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot = np.eye(m)
                rot[i, i] = rot[j, j] = c
                rot[i, j] = s
                rot[j, i] = -s
                A = rot.T @ A @ rot
                A = (A + A.T) / 2
    return np.sort(np.diag(A))


def symmetric_extreme_eigs(A) -> tuple[float, float]:
    """(lambda_min, lambda_max) of a symmetric matrix."""
    w = jacobi_eigvals(A)
    return float(w[0]), float(w[-1])


def operator_norm(A) -> float:
    """Largest singular value by power iteration on A^T A.

    Deterministic: starts from the normalized all-ones vector and only falls
    back to a fixed-seed random restart if the iteration stagnates.
    """
    A = as_array(A)
    if not np.any(A):
        return 0.0
    B = A.T @ A
    m = B.shape[0]
    v = np.ones(m) / np.sqrt(m)
    lam = 0.0
    restarts = 0
    rng = np.random.default_rng(0)
    for _ in range(_POWER_MAX_ITERS):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # started in the kernel; re-randomize deterministically
            if restarts >= 5:
                return 0.0
            v = rng.standard_normal(m)
            v /= np.linalg.norm(v)
            restarts += 1
            continue
        v_new = w / nw
        lam_new = float(v_new @ B @ v_new)
        if abs(lam_new - lam) <= _POWER_TOL * max(lam_new, 1e-300):
            return float(np.sqrt(max(lam_new, 0.0)))
        if np.allclose(v_new, v, atol=1e-16) and restarts < 5:
            v_new = rng.standard_normal(m)
            v_new /= np.linalg.norm(v_new)
            restarts += 1
        v, lam = v_new, lam_new
    return float(np.sqrt(max(lam, 0.0)))


def top_s_support(v: np.ndarray, s: int) -> tuple[int, ...]:
    """Indices of the s largest-magnitude coordinates (stable tie-break)."""
    v = np.asarray(v, dtype=float)
    order = np.argsort(-np.abs(v), kind="stable")
    return tuple(sorted(int(i) for i in order[:s]))


def cone_membership(v, s: int, alpha) -> tuple[bool, tuple[int, ...]]:
    """Is v in the cone C(s, alpha)?  Returns (member, best support).

    The top-s-by-magnitude support maximizes |v_S|_1, so checking it alone
    is equivalent to the existential quantifier over supports.
    """
    v = np.asarray(v, dtype=float).ravel()
    S = top_s_support(v, s)
    on = float(np.sum(np.abs(v[list(S)])))
    off = float(np.sum(np.abs(v))) - on
    return bool(alpha * on >= off - 1e-12 * max(1.0, off)), S
