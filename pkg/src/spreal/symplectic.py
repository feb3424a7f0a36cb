"""Sp(2n) in block form, the involutions tau and theta, and the Siegel action.

A group element is a 2n x 2n numpy array [[A, B], [C, D]].  Integer
elements (object or integer dtype) are handled exactly; float elements are
compared within a tolerance.  Points of the Siegel upper half-space are
complex symmetric n x n arrays Z = X + iY with Y positive definite.
"""

from __future__ import annotations

import numpy as np

from .errors import NotInvertible, NotSymplectic, NumericalSingularity
from .jacobi import sym_power
from .linalg import int_matrix, unimodular_inverse
from .errors import NotUnimodular

SP_TOL = 1e-9
SIEGEL_SYM_TOL = 1e-10
COND_LIMIT = 1e12


def is_exact(g) -> bool:
    dt = np.asarray(g).dtype
    return dt == object or np.issubdtype(dt, np.integer)


def rank_of(g) -> int:
    m = np.asarray(g).shape[0]
    if m % 2 or np.asarray(g).shape != (m, m):
        raise ValueError("expected a 2n x 2n matrix")
    return m // 2


def blocks(g):
    n = rank_of(g)
    return g[:n, :n], g[:n, n:], g[n:, :n], g[n:, n:]


def from_blocks(A, B, C, D) -> np.ndarray:
    return np.block([[A, B], [C, D]])


def _eye(n, exact):
    return int_matrix(np.eye(n, dtype=np.int64)) if exact else np.eye(n)


def _zero(n, exact):
    return int_matrix(np.zeros((n, n), dtype=np.int64)) if exact else np.zeros((n, n))


def identity(n: int, exact: bool = True) -> np.ndarray:
    return _eye(2 * n, exact)


def standard_J(n: int, exact: bool = True) -> np.ndarray:
    I, O = _eye(n, exact), _zero(n, exact)
    return from_blocks(O, I, -I, O)


def translation(X) -> np.ndarray:
    """T_X = [[I, X], [0, I]], which acts on the Siegel space as Z -> Z + X."""
    X = np.asarray(X)
    exact = is_exact(X)
    if exact:
        X = int_matrix(X)
    n = X.shape[0]
    return from_blocks(_eye(n, exact), X, _zero(n, exact), _eye(n, exact))


def lower_shear(S) -> np.ndarray:
    """[[I, 0], [S, I]] for symmetric S."""
    S = np.asarray(S)
    exact = is_exact(S)
    if exact:
        S = int_matrix(S)
    n = S.shape[0]
    return from_blocks(_eye(n, exact), _zero(n, exact), S, _eye(n, exact))


def is_symplectic(g, tol: float | None = None) -> bool:
    g = np.asarray(g)
    n = rank_of(g)
    if is_exact(g) and tol is None:
        J = standard_J(n)
        return bool(np.array_equal(g.T @ J @ g, J))
    gf = np.asarray(g, dtype=float)
    J = standard_J(n, exact=False)
    return float(np.max(np.abs(gf.T @ J @ gf - J))) <= (SP_TOL if tol is None else tol)


def check_symplectic(g, tol: float | None = None) -> np.ndarray:
    if not is_symplectic(g, tol):
        raise NotSymplectic("matrix does not preserve the standard symplectic form")
    return g


def sp_inverse(g) -> np.ndarray:
    """[[A, B], [C, D]]^-1 = [[tD, -tB], [-tC, tA]]."""
    A, B, C, D = blocks(np.asarray(g))
    return from_blocks(D.T, -B.T, -C.T, A.T)


def tau(g) -> np.ndarray:
    """[[A, B], [C, D]] -> [[A, -B], [-C, D]], i.e. conjugation by diag(-I, I)."""
    A, B, C, D = blocks(np.asarray(g))
    return from_blocks(A, -B, -C, D)


def theta(g) -> np.ndarray:
    """Cartan involution g -> J g J^-1 = [[D, -C], [-B, A]]."""
    A, B, C, D = blocks(np.asarray(g))
    return from_blocks(D, -C, -B, A)


def embed_gl(A, exact: bool | None = None) -> np.ndarray:
    """A -> [[A, 0], [0, tA^-1]].

    Integer input must be unimodular; float input only needs to be
    invertible.
    """
    A = np.asarray(A)
    if exact is None:
        exact = is_exact(A)
    n = A.shape[0]
    if exact:
        A = int_matrix(A)
        try:
            Ainv = unimodular_inverse(A)
        except NotUnimodular as exc:
            raise NotInvertible(str(exc)) from exc
        return from_blocks(A, _zero(n, True), _zero(n, True), Ainv.T)
    A = np.asarray(A, dtype=float)
    if np.linalg.cond(A) > COND_LIMIT:
        raise NotInvertible("matrix is numerically singular")
    return from_blocks(A, np.zeros((n, n)), np.zeros((n, n)), np.linalg.inv(A).T)


def embed_unitary(U) -> np.ndarray:
    """A + iB -> [[A, B], [-B, A]]."""
    U = np.asarray(U, dtype=complex)
    A, B = U.real, U.imag
    return from_blocks(A, B, -B, A)


def unitary_part(g) -> np.ndarray:
    """Inverse of ``embed_unitary`` (reads A + iB off the top row of blocks)."""
    A, B, _, _ = blocks(np.asarray(g, dtype=float))
    return A + 1j * B


def is_unitary_element(g, tol: float = SP_TOL) -> bool:
    A, B, C, D = blocks(np.asarray(g, dtype=float))
    if np.max(np.abs(A - D)) > tol or np.max(np.abs(B + C)) > tol:
        return False
    U = A + 1j * B
    return float(np.max(np.abs(U @ U.conj().T - np.eye(len(U))))) <= tol


def siegel_point(X, Y) -> np.ndarray:
    Z = np.asarray(X, dtype=float) + 1j * np.asarray(Y, dtype=float)
    check_siegel(Z)
    return Z


def check_siegel(Z, tol: float = SIEGEL_SYM_TOL) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("Siegel point must be a square matrix")
    if np.max(np.abs(Z - Z.T), initial=0.0) > tol:
        raise ValueError("Siegel point is not symmetric")
    if len(Z) and np.linalg.eigvalsh(0.5 * (Z.imag + Z.imag.T))[0] <= 0:
        raise ValueError("imaginary part is not positive definite")
    return Z


def act(g, Z) -> np.ndarray:
    """Fractional linear action (AZ + B)(CZ + D)^-1."""
    A, B, C, D = (np.asarray(b, dtype=float) for b in blocks(np.asarray(g)))
    Z = np.asarray(Z, dtype=complex)
    num = A @ Z + B
    den = C @ Z + D
    if np.linalg.cond(den) > COND_LIMIT:
        raise NumericalSingularity("CZ + D is too ill-conditioned")
    W = np.linalg.solve(den.T, num.T).T
    return 0.5 * (W + W.T)


def tau_point(Z) -> np.ndarray:
    """Z -> -conj(Z)."""
    return -np.conj(np.asarray(Z, dtype=complex))


def cayley_lift(Z) -> np.ndarray:
    """h = [[Y^1/2, X Y^-1/2], [0, Y^-1/2]] with h . iI = Z."""
    Z = np.asarray(Z, dtype=complex)
    X, Y = Z.real, Z.imag
    Yh = sym_power(Y, 0.5)
    Yih = sym_power(Y, -0.5)
    n = len(Z)
    return from_blocks(Yh, X @ Yih, np.zeros((n, n)), Yih)


def random_unimodular(n: int, rng: np.random.Generator, steps: int | None = None,
                      spread: int = 2) -> np.ndarray:
    """Product of elementary shears, a sign change and a permutation."""
    U = np.eye(n, dtype=np.int64)
    if n == 0:
        return int_matrix(U)
    steps = 2 * n if steps is None else steps
    for _ in range(steps):
        if n < 2:
            break
        i, j = rng.choice(n, size=2, replace=False)
        U[i] += int(rng.integers(-spread, spread + 1)) * U[j]
    U = U[rng.permutation(n)]
    U = U * rng.choice([-1, 1], size=(n, 1))
    return int_matrix(U)


def random_symmetric_int(n: int, rng: np.random.Generator, bound: int = 3) -> np.ndarray:
    S = rng.integers(-bound, bound + 1, size=(n, n))
    S = np.triu(S) + np.triu(S, 1).T
    return int_matrix(S)


def random_sp_int(n: int, rng: np.random.Generator, length: int = 6) -> np.ndarray:
    """Random word in J, T_S (entries of S in [-3, 3]) and embedded GL(n, Z)."""
    g = identity(n)
    J = standard_J(n)
    for _ in range(length):
        kind = rng.integers(3)
        if kind == 0:
            step = J
        elif kind == 1:
            step = translation(random_symmetric_int(n, rng))
        else:
            step = embed_gl(random_unimodular(n, rng, steps=n))
        g = g @ step
    return g


def random_sp_real(n: int, rng: np.random.Generator, length: int = 2,
                   spread: float = 0.5) -> np.ndarray:
    """Random real symplectic matrix of moderate condition number.

    Product of shears T_S with S ~ spread * N(0, 1), embedded linear maps
    near the identity and (with probability 1/2) the element J.
    """
    g = np.eye(2 * n)
    J = standard_J(n, exact=False)
    for _ in range(length):
        S = spread * rng.normal(size=(n, n))
        g = g @ translation(0.5 * (S + S.T))
        M = np.eye(n) + 0.5 * spread * rng.normal(size=(n, n))
        g = g @ embed_gl(M, exact=False)
        if rng.random() < 0.5:
            g = g @ J
    return g
