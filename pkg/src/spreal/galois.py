"""Cocycles gamma with gamma tau(gamma) = I and their explicit trivialization.

Every such cocycle over the reals splits as gamma = tau(g) g^-1.  The
functions here construct g: first a point Z with gamma.Z = tau(Z) (by
normalizing the C block and solving the diagonal and C = 0 cases
separately), then g from Z through the Cayley lift and a unitary square
root.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotCocycle, NotRealPoint, RankInstability
from .jacobi import jacobi_eigh
from .symplectic import (
    SP_TOL,
    act,
    blocks,
    cayley_lift,
    embed_gl,
    embed_unitary,
    is_exact,
    rank_of,
    sp_inverse,
    tau,
    tau_point,
    translation,
    unitary_part,
)

UNITARY_TOL = 1e-9
COBOUNDARY_TOL = 1e-8
HYPOTHESIS_TOL = 1e-6
CLUSTER_TOL = 1e-8
RANK_RTOL = 1e-8


def is_cocycle(gamma, tol: float | None = None) -> bool:
    """gamma tau(gamma) == I, exactly for integer input."""
    g = np.asarray(gamma)
    n = rank_of(g)
    prod = g @ tau(g)
    if is_exact(g) and tol is None:
        return bool(np.array_equal(prod, np.eye(2 * n, dtype=np.int64).astype(object)))
    return float(np.max(np.abs(np.asarray(prod, dtype=float) - np.eye(2 * n)))) <= (
        SP_TOL if tol is None else tol)


def cocycle_conditions(gamma, tol: float | None = None) -> dict[str, bool]:
    """The block identities forced by gamma tau(gamma) = I.

    A = tD, C and B symmetric, A^2 - BC = I, CA = tA C, AB = B tA.
    """
    A, B, C, D = blocks(np.asarray(gamma))
    n = A.shape[0]
    exact = is_exact(gamma) and tol is None
    I = np.eye(n, dtype=np.int64).astype(object) if exact else np.eye(n)

    def eq(X, Y):
        if exact:
            return bool(np.array_equal(X, Y))
        diff = np.asarray(X, dtype=float) - np.asarray(Y, dtype=float)
        return float(np.max(np.abs(diff), initial=0.0)) <= (SP_TOL if tol is None else tol)

    return {
        "A = tD": eq(A, D.T),
        "C symmetric": eq(C, C.T),
        "B symmetric": eq(B, B.T),
        "A^2 - BC = I": eq(A @ A - B @ C, I),
        "CA = tA C": eq(C @ A, A.T @ C),
        "AB = B tA": eq(A @ B, B @ A.T),
    }


def locus_residual(gamma, Z) -> float:
    """max |gamma.Z - tau(Z)|."""
    return float(np.max(np.abs(act(gamma, Z) - tau_point(Z))))


def coboundary_residual(gamma, g) -> float:
    """max |tau(g) g^-1 - gamma|."""
    g = np.asarray(g, dtype=float)
    return float(np.max(np.abs(tau(g) @ sp_inverse(g) - np.asarray(gamma, dtype=float))))


def simultaneous_diagonalize(A, B, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Orthogonal Q with Q^T A Q and Q^T B Q both diagonal.

    A and B are commuting real symmetric matrices.  Jacobi on A, then Jacobi
    on B restricted to each cluster of equal eigenvalues of A.
    """
    wA, Q = jacobi_eigh(A)
    n = len(wA)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and wA[stop] - wA[stop - 1] <= cluster_tol:
            stop += 1
        if stop - start > 1:
            block = Q[:, start:stop]
            _, R = jacobi_eigh(block.T @ B @ block)
            Q[:, start:stop] = block @ R
        start = stop
    return Q


def _principal_sqrt_phase(lam):
    # square root of conj(lam) on the unit circle, argument taken in (-pi, pi]
    phi = -np.angle(lam)
    phi = np.where(phi <= -np.pi, np.pi, phi)
    return np.exp(0.5j * phi)


def unitary_split(U, tol: float = HYPOTHESIS_TOL) -> np.ndarray:
    """delta in U(n) with conj(delta) delta^-1 = U, for unitary U with U conj(U) = I.

    ``U`` is the complex n x n matrix A + iB.  The hypothesis forces A, B
    symmetric and commuting with A^2 + B^2 = I; these are checked within
    ``tol``.
    """
    U = np.asarray(U, dtype=complex)
    n = len(U)
    A, B = U.real, U.imag
    I = np.eye(n)
    defects = (
        np.max(np.abs(A - A.T), initial=0.0),
        np.max(np.abs(B - B.T), initial=0.0),
        np.max(np.abs(A @ B - B @ A), initial=0.0),
        np.max(np.abs(A @ A + B @ B - I), initial=0.0),
    )
    if max(defects) > tol:
        raise NotCocycle(f"not a unitary cocycle (defect {max(defects):.2e})")
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    Q = simultaneous_diagonalize(A, B)
    lam = np.diag(Q.T @ U @ Q)
    lam = lam / np.abs(lam)
    mu = _principal_sqrt_phase(lam)
    return (Q * mu) @ Q.T


def unitary_split_residual(U, delta) -> float:
    delta = np.asarray(delta, dtype=complex)
    return float(np.max(np.abs(np.conj(delta) @ np.linalg.inv(delta) - np.asarray(U))))


def coboundary_from_fixed_point(gamma, Z, tol: float = HYPOTHESIS_TOL) -> np.ndarray:
    """Real symplectic g with gamma = tau(g) g^-1, given Z with gamma.Z = tau(Z).

    h = Cayley lift of Z, alpha = tau(h)^-1 gamma h is unitary, split
    alpha = tau(delta) delta^-1 and return g = h delta.
    """
    gamma = np.asarray(gamma, dtype=float)
    scale = max(1.0, float(np.max(np.abs(gamma))))
    if not is_cocycle(gamma, tol * scale * scale):
        raise NotCocycle("gamma tau(gamma) != I")
    Z = np.asarray(Z, dtype=complex)
    if locus_residual(gamma, Z) > tol * max(1.0, float(np.max(np.abs(Z)))):
        raise NotRealPoint("gamma.Z != tau(Z)")
    Z = polish_fixed_point(gamma, Z)
    h = cayley_lift(Z)
    alpha = sp_inverse(tau(h)) @ gamma @ h
    delta = unitary_split(unitary_part(alpha), tol=tol * scale)
    return h @ embed_unitary(delta)


def polish_fixed_point(gamma, Z, rounds: int = 4) -> np.ndarray:
    """Average Z with its image under the antiholomorphic involution
    Z -> -conj(gamma.Z); near the fixed set each round squares the defect.
    """
    best, res = Z, locus_residual(gamma, Z)
    for _ in range(rounds):
        W = 0.5 * (best - np.conj(act(gamma, best)))
        r = locus_residual(gamma, W)
        if r >= res:
            break
        best, res = W, r
    return best


def _column_space(M, rtol: float = 1e-8) -> np.ndarray:
    U, s, _ = np.linalg.svd(M)
    if not len(s):
        return U[:, :0]
    return U[:, : int(np.sum(s > rtol * max(1.0, s[0])))]


def _c_zero_point(A4, B4) -> np.ndarray:
    # fixed point for [[A4, B4], [0, tA4]] with A4^2 = I: shear away B4,
    # diagonalize A4 over GL(s, R), finish in U(s)
    s = len(A4)
    if s == 0:
        return np.zeros((0, 0), dtype=complex)
    x = 0.5 * np.linalg.solve(A4, B4)
    h = translation(0.5 * (x + x.T))
    I = np.eye(s)
    P = np.hstack([_column_space(0.5 * (I + A4)), _column_space(0.5 * (I - A4))])
    if P.shape[1] != s:
        raise NotCocycle("A block of the C = 0 part is not an involution")
    plus = _column_space(0.5 * (I + A4)).shape[1]
    Lam = np.diag([1.0] * plus + [-1.0] * (s - plus)).astype(complex)
    delta = unitary_split(Lam)
    W = act(embed_unitary(delta), 1j * I)
    W = act(embed_gl(P, exact=False), W)
    return act(sp_inverse(h), W)


@dataclass
class Trivialization:
    """Witness g with gamma = tau(g) g^-1 and the real point it came from."""

    witness: np.ndarray
    fixed_point: np.ndarray
    rank: int
    residual: float
    steps: dict = field(default_factory=dict)


def trivialize(gamma, tol: float = HYPOTHESIS_TOL) -> Trivialization:
    gamma_p = np.asarray(gamma, dtype=float)
    n = rank_of(gamma_p)
    scale = max(1.0, float(np.max(np.abs(gamma_p))))
    if not is_cocycle(gamma_p, tol * scale * scale):
        raise NotCocycle("gamma tau(gamma) != I")
    Cp = blocks(gamma_p)[2]
    Cp = 0.5 * (Cp + Cp.T)
    w, Q = jacobi_eigh(Cp)
    cnorm = float(np.max(np.abs(Cp), initial=0.0))
    thr = RANK_RTOL * cnorm
    if cnorm > 0 and np.any((np.abs(w) > thr / 10) & (np.abs(w) < thr * 10)):
        raise RankInstability("eigenvalues of C lie too close to the rank threshold")
    nonzero = np.abs(w) > thr if cnorm > 0 else np.zeros(n, dtype=bool)
    order = np.concatenate([np.flatnonzero(nonzero), np.flatnonzero(~nonzero)])
    r = int(nonzero.sum())
    k = Q[:, order].T
    h1 = embed_gl(k, exact=False)
    g1 = h1 @ gamma_p @ sp_inverse(h1)  # tau(h1) = h1
    A, _, C, _ = blocks(g1)
    C1 = C[:r, :r]
    # symmetric x whose first r columns are A[:, :r] C1^-1; then A - xC has
    # vanishing first r columns and the cocycle splits into an r-part and
    # a part with C = 0
    x = np.zeros((n, n))
    if r:
        x[:, :r] = np.linalg.solve(C1.T, A[:, :r].T).T
        x[:r, r:] = x[r:, :r].T
        x[:r, :r] = 0.5 * (x[:r, :r] + x[:r, :r].T)
    h2 = translation(x)
    g2 = tau(h2) @ g1 @ sp_inverse(h2)
    A2, B2, C2, _ = blocks(g2)
    Z = np.zeros((n, n), dtype=complex)
    if r:
        Z[:r, :r] = 1j * np.diag(1.0 / np.abs(np.diag(C2)[:r]))
    Z[r:, r:] = _c_zero_point(A2[r:, r:], B2[r:, r:])
    Zg = act(sp_inverse(h2), Z)
    Zp = act(sp_inverse(h1), Zg)
    g = coboundary_from_fixed_point(gamma_p, Zp, tol)
    return Trivialization(
        witness=g,
        fixed_point=Zp,
        rank=r,
        residual=coboundary_residual(gamma_p, g),
        steps={"h1": h1, "h2": h2, "normal_form": g2},
    )


def sp_trivialize(gamma, tol: float = HYPOTHESIS_TOL) -> np.ndarray:
    """Real symplectic g with gamma = tau(g) g^-1."""
    return trivialize(gamma, tol).witness


@dataclass
class RealLocus:
    """The gamma-real locus g . iC_n, sampled at a few points."""

    witness: np.ndarray
    samples: list
    max_residual: float


def random_spd(n: int, rng: np.random.Generator, spread: float = 0.5) -> np.ndarray:
    M = np.eye(n) + spread * rng.normal(size=(n, n))
    return M @ M.T + 0.1 * np.eye(n)


def real_locus(gamma, seed=None, samples: int = 5, tol: float = HYPOTHESIS_TOL) -> RealLocus:
    """Witness g for the locus {Z : gamma.Z = tau(Z)} = g . iC_n.

    With a ``seed`` the witness is re-derived from a random point of the
    locus, so different seeds give witnesses differing by GL(n, R).
    """
    g = sp_trivialize(gamma, tol)
    n = rank_of(g)
    rng = np.random.default_rng(seed)
    if seed is not None:
        g = coboundary_from_fixed_point(gamma, act(g, 1j * random_spd(n, rng)), tol)
    pts = [act(g, 1j * random_spd(n, rng)) for _ in range(samples)]
    res = max((locus_residual(gamma, Z) for Z in pts), default=0.0)
    return RealLocus(witness=g, samples=pts, max_residual=res)
