"""Period lattices, polarizations and real structures attached to Siegel points.

A point Z gives the lattice map F_Z(x, y) = Zx + y from R^n + R^n to C^n,
the lattice L_Z = F_Z(Z^2n) and the Hermitian form H_Z(u, v) = tu Y^-1 conj(v).
A real point (gamma.Z = -conj(Z)) gives the antilinear map
kappa(M) = t(CZ + D) conj(M).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .congruence import factor_beta_u, in_principal
from .errors import BudgetExceeded, NotCocycle, NotFound, NotRealPoint, NumericalSingularity
from .galois import is_cocycle, locus_residual
from .linalg import int_matrix
from .symplectic import act, blocks, check_siegel, rank_of

LATTICE_TOL = 1e-7
FORM_TOL = 1e-8
REAL_POINT_TOL = 1e-8


def lattice_map(Z) -> np.ndarray:
    """The n x 2n complex matrix (Z, I)."""
    Z = np.asarray(Z, dtype=complex)
    return np.hstack([Z, np.eye(len(Z))])


def lattice_coords(Z, M) -> np.ndarray:
    """Real (x, y) with Zx + y = M (stacked as a 2n vector, or 2n x k)."""
    Z = np.asarray(Z, dtype=complex)
    M = np.asarray(M, dtype=complex)
    x = np.linalg.solve(Z.imag, M.imag)
    y = M.real - Z.real @ x
    return np.concatenate([x, y], axis=0)


def standard_form(p, p2) -> float:
    """Q0((x, y), (x', y')) = x.y' - y.x'."""
    p, p2 = np.asarray(p, dtype=float), np.asarray(p2, dtype=float)
    n = len(p) // 2
    return float(p[:n] @ p2[n:] - p[n:] @ p2[:n])


def hermitian_form(Z, u, v) -> complex:
    """H_Z(u, v) = tu (Im Z)^-1 conj(v)."""
    Z = np.asarray(Z, dtype=complex)
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    return complex(u @ np.linalg.solve(Z.imag, np.conj(v)))


def polarization(Z, u, v) -> float:
    """Q_Z(u, v) = Q0(F_Z^-1 u, F_Z^-1 v), computed through lattice coordinates."""
    return standard_form(lattice_coords(Z, u), lattice_coords(Z, v))


def _is_integral(c, tol=LATTICE_TOL) -> bool:
    return bool(np.max(np.abs(c - np.round(c)), initial=0.0) <= tol)


@dataclass
class RealStructure:
    """kappa(gamma, Z) for a real point: gamma.Z = tau(Z), gamma tau(gamma) = I."""

    gamma: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        self.Z = check_siegel(self.Z)
        g = np.asarray(self.gamma)
        if not is_cocycle(np.asarray(g, dtype=float), 1e-9 * max(1.0, float(np.max(np.abs(g)))) ** 2):
            raise NotCocycle("kappa needs gamma tau(gamma) = I")
        res = locus_residual(g, self.Z)
        if res > REAL_POINT_TOL * max(1.0, float(np.max(np.abs(self.Z)))):
            raise NotRealPoint(f"gamma.Z != tau(Z) (residual {res:.2e})")

    @property
    def multiplier(self) -> np.ndarray:
        _, _, C, D = (np.asarray(b, dtype=float) for b in blocks(np.asarray(self.gamma)))
        return (C @ self.Z + D).T

    def apply(self, M) -> np.ndarray:
        return self.multiplier @ np.conj(np.asarray(M, dtype=complex))


def kappa_apply(rs: RealStructure, M) -> np.ndarray:
    """M -> t(CZ + D) conj(M)."""
    return rs.apply(M)


def kappa_lattice_matrix(rs: RealStructure) -> np.ndarray:
    """Matrix of kappa in lattice coordinates; equals t(gamma) I_- up to rounding."""
    F = lattice_map(rs.Z)
    return lattice_coords(rs.Z, rs.apply(F))


def kappa_checks(rs: RealStructure, rng: np.random.Generator, samples: int = 20) -> dict:
    """Residuals of the four defining properties on random vectors."""
    n = len(rs.Z)
    def rand():
        return rng.normal(size=n) + 1j * rng.normal(size=n)
    anti = inv = pol = 0.0
    for _ in range(samples):
        u, v, c = rand(), rand(), complex(rng.normal(), rng.normal())
        anti = max(anti, float(np.max(np.abs(rs.apply(c * u + v) - (np.conj(c) * rs.apply(u) + rs.apply(v))))))
        inv = max(inv, float(np.max(np.abs(rs.apply(rs.apply(u)) - u))))
        pol = max(pol, abs(polarization(rs.Z, rs.apply(u), rs.apply(v)) + polarization(rs.Z, u, v)))
    K = kappa_lattice_matrix(rs)
    Iminus = np.diag([-1.0] * n + [1.0] * n)
    return {
        "antilinear": anti,
        "involutive": inv,
        "polarization_reversing": pol,
        "lattice_integrality": float(np.max(np.abs(K - np.round(K)))),
        "diagram": float(np.max(np.abs(K - np.asarray(rs.gamma, dtype=float).T @ Iminus))),
    }


def level_compatible(rs: RealStructure, N: int) -> bool:
    """kappa(u_i / N) == -u_i / N and kappa(v_j / N) == v_j / N (mod L_Z).

    u_i = F_Z(e_i), v_j = F_Z(f_j); coordinates are compared in the (Z, I)
    basis within LATTICE_TOL.
    """
    n = len(rs.Z)
    F = lattice_map(rs.Z)
    images = lattice_coords(rs.Z, rs.apply(F / N))
    signs = np.diag([-1.0] * n + [1.0] * n)
    return _is_integral(images - signs / N)


def gamma_level_equivalence_check(gamma, Z, N: int) -> tuple[bool, bool]:
    """(gamma in Gamma(N) exactly, kappa(gamma, Z) compatible with level N)."""
    rs = RealStructure(gamma, Z)
    return in_principal(int_matrix(gamma), N), level_compatible(rs, N)


@dataclass
class Isomorphism:
    Omega: np.ndarray
    psi: np.ndarray
    diagram_residual: float
    form_residual: float


def isomorphism_from_matrix(h, Z, rng: np.random.Generator | None = None) -> Isomorphism:
    """Omega = h.Z and psi(M) = t(CZ + D) M, with psi F_Omega = F_Z th."""
    Z = check_siegel(Z)
    hf = np.asarray(h, dtype=float)
    Omega = act(hf, Z)
    _, _, C, D = blocks(hf)
    psi = (C @ Z + D).T
    diag = float(np.max(np.abs(psi @ lattice_map(Omega) - lattice_map(Z) @ hf.T)))
    rng = rng or np.random.default_rng(0)
    n = len(Z)
    form = 0.0
    for _ in range(5):
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        form = max(form, abs(hermitian_form(Z, psi @ u, psi @ v) - hermitian_form(Omega, u, v)))
    return Isomorphism(Omega=Omega, psi=psi, diagram_residual=diag, form_residual=form)


def preserves_level(h, Z, N: int) -> bool:
    """psi(F_Omega(w / N)) == F_Z(w / N) (mod L_Z) for the standard basis w."""
    iso = isomorphism_from_matrix(h, Z)
    n = len(Z)
    images = lattice_coords(Z, iso.psi @ lattice_map(iso.Omega) / N)
    return _is_integral(images - np.eye(2 * n) / N)


def _search_generators(n: int):
    from .boundary import sp_generators

    return sp_generators(n)


@dataclass
class ComessattiResult:
    h: np.ndarray
    Z: np.ndarray
    word: list
    explored: int


def comessatti_search(Z, gamma=None, bound: int = 6, max_nodes: int = 100_000,
                      tol: float = LATTICE_TOL) -> ComessattiResult:
    """h in Sp(2n, Z) with Re(h.Z) half-integral, by breadth-first search.

    Words grow on the left (Z -> s.Z).  Points are deduplicated after
    rounding to 1e-6.  ``gamma`` (if given) is checked to make Z real.
    """
    Z = check_siegel(Z)
    n = len(Z)
    if gamma is not None and locus_residual(gamma, Z) > REAL_POINT_TOL * max(1.0, float(np.max(np.abs(Z)))):
        raise NotRealPoint("gamma.Z != tau(Z)")
    from .symplectic import identity

    def good(W):
        return _is_integral(2 * W.real, tol)

    def key(W):
        return tuple(np.round(W.real * 1e6).astype(np.int64).flat) + tuple(
            np.round(W.imag * 1e6).astype(np.int64).flat)

    start = identity(n)
    if good(Z):
        return ComessattiResult(start, Z, [], 1)
    gens = _search_generators(n)
    seen = {key(Z)}
    frontier = deque([(Z, start, [])])
    for _ in range(bound):
        nxt = deque()
        for W, h, word in frontier:
            for name, g in gens:
                try:
                    W2 = act(g, W)
                except NumericalSingularity:
                    continue
                k = key(W2)
                if k in seen:
                    continue
                seen.add(k)
                h2 = g @ h
                if good(W2):
                    return ComessattiResult(h2, act(h2, Z), [name] + word, len(seen))
                if len(seen) > max_nodes:
                    raise BudgetExceeded(f"search exceeded {max_nodes} nodes")
                nxt.append((W2, h2, [name] + word))
        frontier = nxt
    raise NotFound(f"no half-integral representative within {bound} generators")


def rational_witness(gamma, m: int, bound: int = 6):
    """beta in Gamma_2m(2) with gamma = tau(beta) beta^-1, via an integral
    splitting h (breadth-first search) and the factorization h = beta u.
    """
    from .boundary import find_splitting

    h = find_splitting(int_matrix(gamma), bound).h
    beta, _ = factor_beta_u(h, m)
    return beta


def real_pair(g, Y=None):
    """(gamma, Z) = (tau(g) g^-1, g.iY) for integral g."""
    from .symplectic import sp_inverse, tau

    g = int_matrix(g)
    n = rank_of(g)
    Y = np.eye(n) if Y is None else np.asarray(Y, dtype=float)
    return tau(g) @ sp_inverse(g), act(g, 1j * Y)

