"""Normal form of integer involutions modulo powers of two.

Given A in GL(n, Z) with A == I (mod 2) and A^2 == I (mod 2^(k+1)), find
p in GL(n, Z) with p^-1 A p == diag(+-1) (mod 2^k).  The construction peels
off one eigenvector modulo 2^k at a time, recurses on the complement and
then repairs the first row with a sign-dependent substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadBlockForm, HypothesisFailed, NotUnimodular
from .linalg import (
    det,
    identity,
    int_matrix,
    kernel_basis,
    primitive_extend,
    smith_normal_form,
    unimodular_inverse,
    zeros,
)


def _v2(x: int) -> int:
    x = abs(int(x))
    if x == 0:
        return 10**9
    return (x & -x).bit_length() - 1


def _zero_mod(M, N) -> bool:
    return all(int(x) % N == 0 for x in np.asarray(M).flat)


def check_hypotheses(A, k: int, unimodular: bool = True) -> np.ndarray:
    """Validate A == I (mod 2), A^2 == I (mod 2^(k+1)), det A = +-1, k >= 2.

    The recursive sub-blocks are only endomorphisms (their determinant is
    +-1 modulo 2^k), so they are checked with ``unimodular=False``.
    """
    A = int_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise HypothesisFailed("matrix is not square")
    if k < 2:
        raise HypothesisFailed("k must be at least 2")
    if unimodular and abs(det(A)) != 1:
        raise NotUnimodular("matrix is not in GL(n, Z)")
    I = identity(n)
    if not _zero_mod(A - I, 2):
        raise HypothesisFailed("A is not congruent to I modulo 2")
    if not _zero_mod(A @ A - I, 2 ** (k + 1)):
        raise HypothesisFailed(f"A^2 is not congruent to I modulo {2 ** (k + 1)}")
    return A


def is_normal_form(A, p, signs, k: int) -> bool:
    """p^-1 A p == diag(signs) (mod 2^k), by exact arithmetic."""
    A, p = int_matrix(A), int_matrix(p)
    D = int_matrix(np.diag(np.asarray(signs, dtype=np.int64))) if len(signs) else zeros(0)
    return _zero_mod(unimodular_inverse(p) @ A @ p - D, 2**k)


@dataclass
class Eigenvector:
    """A primitive x with A x == sign * x (mod 2^k) and how it was found."""

    x: np.ndarray
    sign: int
    branch: str
    d1: int | None = None
    e1: int | None = None


def find_eigenvector(A, k: int, use_kernel: bool = True) -> Eigenvector:
    """One step of the construction.

    A primitive vector of ker(A - I) (preferred) or ker(A + I) is an exact
    eigenvector.  Otherwise both A - I and A + I have full rank; with Smith
    bases (A - I)M = sum d_i x_i Z and (A + I)M = sum e_i y_i Z, the 2-adic
    valuation of gcd(d1, e1) is exactly one since the two images add up to
    2M.  If d1 / 2 is odd then A x1 == -x1, else e1 / 2 is odd and
    A y1 == y1 (mod 2^k).  ``use_kernel=False`` skips the kernel shortcut
    so the elementary-divisor branch can be exercised on any input.
    """
    A = int_matrix(A)
    n = A.shape[0]
    I = identity(n)
    for sign, M in ((1, A - I), (-1, A + I)) if use_kernel else ():
        K = kernel_basis(M)
        if K.shape[1]:
            return Eigenvector(K[:, 0].copy(), sign, "kernel")
    snf_m = smith_normal_form(A - I)
    snf_p = smith_normal_form(A + I)
    d1, e1 = snf_m.diagonal[0], snf_p.diagonal[0]
    if d1 == 0 or e1 == 0:
        # only reachable with use_kernel=False: A = +-I exactly
        x = identity(n)[:, 0]
        return Eigenvector(x, 1 if d1 == 0 else -1, "kernel", d1, e1)
    if _v2(d1) >= 2 and _v2(e1) >= 2:
        raise HypothesisFailed("both leading elementary divisors divisible by 4")
    if _v2(d1) == 1:
        return Eigenvector(snf_m.U_inv[:, 0].copy(), -1, "snf-minus", d1, e1)
    return Eigenvector(snf_p.U_inv[:, 0].copy(), 1, "snf-plus", d1, e1)


def _normalize(A, k: int, depth: int, trace: list | None, use_kernel: bool):
    n = A.shape[0]
    if n == 0:
        return zeros(0), []
    check_hypotheses(A, k, unimodular=depth == 0)
    ev = find_eigenvector(A, k, use_kernel)
    if trace is not None:
        trace.append(ev)
    N = 2**k
    if not _zero_mod(A @ ev.x.reshape(-1, 1) - ev.sign * ev.x.reshape(-1, 1), N):
        raise HypothesisFailed("eigenvector congruence failed")
    P = primitive_extend(ev.x)
    Ap = unimodular_inverse(P) @ A @ P
    a12, a22 = Ap[0:1, 1:], Ap[1:, 1:]
    p2, signs2 = _normalize(a22, k, depth + 1, trace, use_kernel)
    Q = P.copy()
    Q[:, 1:] = P[:, 1:] @ p2 if n > 1 else P[:, 1:]
    R = identity(n)
    a = (a12 @ p2)[0] if n > 1 else []
    eps1 = ev.sign
    for j, eps in enumerate(signs2, start=1):
        aj = int(a[j - 1])
        if eps == eps1:
            if aj % N:
                raise HypothesisFailed("first-row entry not divisible by 2^k")
            continue
        # x'_j = eps_j x_j + (a_j / 2) x_1
        R[0, j] = aj // 2
        R[j, j] = eps
    return Q @ R, [eps1] + list(signs2)


def normalize_involution(A, k: int, trace: list | None = None, use_kernel: bool = True):
    """Return (p, signs) with p^-1 A p == diag(signs) (mod 2^k), +1 signs first.

    ``trace`` (a list) collects the eigenvector found at each recursion
    level.
    """
    A = check_hypotheses(A, k)
    p, signs = _normalize(A, k, 0, trace, use_kernel)
    order = sorted(range(len(signs)), key=lambda i: -signs[i])
    p = p[:, order] if len(signs) else p
    signs = [signs[i] for i in order]
    if not is_normal_form(A, p, signs, k):
        raise HypothesisFailed("normal form verification failed")
    return p, signs


def check_block_form(A, q: int) -> np.ndarray:
    A = int_matrix(A)
    n = A.shape[0]
    if not 0 <= q <= n:
        raise BadBlockForm("q out of range")
    if not np.array_equal(A[:q, :q], identity(q)) or any(int(x) for x in A[:q, q:].flat):
        raise BadBlockForm("A is not of the form [[I_q, 0], [*, *]]")
    return A


def normalize_involution_block(A, k: int, q: int):
    """Same normal form with p = [[I_q, 0], [X, p2]] for A = [[I_q, 0], [R, S]].

    p2 normalizes S.  With R' = p2^-1 R, the rows of R' with sign +1 are
    already 0 (mod 2^k); the others are removed by X = p2 Y, where Y has
    rows R'_i / 2 at the -1 signs and 0 elsewhere.  The first q signs are +1.
    """
    A = check_block_form(check_hypotheses(A, k), q)
    n = A.shape[0]
    R, S = A[q:, :q], A[q:, q:]
    p2, signs2 = normalize_involution(S, k) if n > q else (zeros(0), [])
    Rp = unimodular_inverse(p2) @ R if n > q else R
    Y = zeros(n - q, q)
    for i, eps in enumerate(signs2):
        if eps == -1:
            Y[i] = [int(x) // 2 for x in Rp[i]]
    p = identity(n)
    if n > q:
        p[q:, :q] = p2 @ Y
        p[q:, q:] = p2
    signs = [1] * q + list(signs2)
    if not is_normal_form(A, p, signs, k):
        raise HypothesisFailed("block normal form verification failed")
    return p, signs


def random_instance(n: int, k: int, rng: np.random.Generator, q: int = 0,
                    exact: bool = True, spread: int = 2) -> np.ndarray:
    """A = p0 (D + 2^k N) p0^-1 with D = diag(I_q, +-1).

    p0 has the block form [[I_q, 0], [*, *]].  With ``exact`` N = 0 and A is
    a genuine involution; otherwise N is strictly upper triangular, which
    keeps det = +-1 and A^2 == I (mod 2^(k+1)) while A^2 != I in general.
    """
    from .symplectic import random_unimodular

    V = random_unimodular(n - q, rng, spread=spread) if n > q else zeros(0)
    p0 = identity(n)
    if n > q:
        p0[q:, q:] = V
        p0[q:, :q] = int_matrix(rng.integers(-spread, spread + 1, size=(n - q, q)))
    D = int_matrix(np.diag([1] * q + list(rng.choice([-1, 1], size=n - q))))
    if not exact and n > q:
        Nm = np.triu(rng.integers(-2, 3, size=(n, n)), 1)
        Nm[:q] = 0
        D = D + int_matrix(Nm) * 2**k
    return p0 @ D @ unimodular_inverse(p0)


@lru_cache(maxsize=None)
def _rotation_blocks(k: int, bound: int = 25) -> tuple:
    # 2 x 2 integer matrices == I (mod 2) with det +-1 and
    # A^2 == I (mod 2^(k+1)) but neither eigenvalue +-1
    N = 2 ** (k + 1)
    out = []
    for a in range(-bound, bound + 1):
        for d in range(-bound, bound + 1):
            if a % 2 == 0 or d % 2 == 0:
                continue
            for b in range(-bound + 1, bound, 2):
                for dt in (1, -1):
                    if b == 0 or (a * d - dt) % b:
                        continue
                    c = (a * d - dt) // b
                    if c % 2 or (a * a + b * c - 1) % N or (b * (a + d)) % N:
                        continue
                    if (c * (a + d)) % N or (c * b + d * d - 1) % N:
                        continue
                    if (a - 1) * (d - 1) == b * c or (a + 1) * (d + 1) == b * c:
                        continue
                    out.append((a, b, c, d))
    return tuple(out)


def random_nonexact_instance(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Conjugate of a block diagonal of 2 x 2 blocks without +-1 eigenvectors.

    For odd n a final 1 x 1 block +-1 is added.  These satisfy the
    hypotheses with A^2 != I and force the elementary-divisor branch.
    """
    from .symplectic import random_unimodular

    blocks = _rotation_blocks(k)
    D = zeros(n)
    for i in range(0, n - 1, 2):
        a, b, c, d = blocks[int(rng.integers(len(blocks)))]
        D[i:i + 2, i:i + 2] = int_matrix([[a, b], [c, d]])
    if n % 2:
        D[n - 1, n - 1] = int(rng.choice([-1, 1]))
    p0 = random_unimodular(n, rng, steps=n, spread=1)
    return p0 @ D @ unimodular_inverse(p0)
