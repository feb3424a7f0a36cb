"""Cyclic Jacobi eigensolver for real symmetric matrices."""

from __future__ import annotations

import numpy as np

TOL = 1e-14


def jacobi_eigh(S, tol: float = TOL, max_sweeps: int = 64):
    """Eigen-decomposition ``S = V @ diag(w) @ V.T`` with ascending ``w``.

    Sweeps rotate every off-diagonal pair in row order until the
    off-diagonal Frobenius norm drops below ``tol * ||S||_F``.
    """
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= np.finfo(float).tiny:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * cp - s * cq, s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * rp - s * rq, s * rp + c * rq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def sym_power(Y, power: float, tol: float = TOL) -> np.ndarray:
    """``Y ** power`` for symmetric positive definite ``Y``."""
    w, V = jacobi_eigh(Y, tol)
    if w[0] <= 0:
        raise ValueError("matrix is not positive definite")
    return (V * w**power) @ V.T
