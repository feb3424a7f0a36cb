"""Congruence subgroups of Sp(2n, Z), the twist g -> tau(g) g^-1, and the
factorization g = beta u with beta in Gamma_2m(2) and u in GL(n, Z).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisFailed, NotLinearBlock
from .linalg import int_matrix, lift_gl_mod2
from .symplectic import (
    blocks,
    embed_gl,
    from_blocks,
    identity,
    lower_shear,
    random_sp_int,
    random_symmetric_int,
    rank_of,
    sp_inverse,
    translation,
)

KINDS = ("principal", "gamma2m", "linear")
_PREFIX = {"gamma": "principal", "gamma2m": "gamma2m", "gammaL": "linear"}


@dataclass(frozen=True)
class CongruenceSpec:
    """Gamma(N) (``principal``), Gamma_2m(2) (``gamma2m``, level = m) or
    Gamma_l(N) (``linear``).  ``n`` is optional and only checked when given.
    """

    kind: str
    level: int
    n: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown congruence kind {self.kind!r}")
        if self.level < 1:
            raise ValueError("level must be >= 1")

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "CongruenceSpec":
        """Parse ``gamma:N``, ``gamma2m:m`` or ``gammaL:N``."""
        prefix, _, level = text.partition(":")
        if prefix not in _PREFIX or not level:
            raise ValueError(f"bad congruence spec {text!r}")
        return cls(_PREFIX[prefix], int(level), n)

    def __str__(self):
        inv = {v: k for k, v in _PREFIX.items()}
        return f"{inv[self.kind]}:{self.level}"


def principal(N: int) -> CongruenceSpec:
    return CongruenceSpec("principal", N)


def gamma2m(m: int) -> CongruenceSpec:
    return CongruenceSpec("gamma2m", m)


def _zero_mod(M, N) -> bool:
    return all(int(x) % N == 0 for x in np.asarray(M).flat)


def _identity_mod(M, N) -> bool:
    M = np.asarray(M)
    return _zero_mod(M - int_matrix(np.eye(M.shape[0], dtype=np.int64)), N)


def in_principal(g, N: int) -> bool:
    """g == I (mod N)."""
    return _identity_mod(g, N)


def is_member(g, spec: CongruenceSpec) -> bool:
    g = int_matrix(g)
    n = rank_of(g)
    if spec.n is not None and spec.n != n:
        raise ValueError(f"rank mismatch: element has n={n}, spec has n={spec.n}")
    A, B, C, D = blocks(g)
    if spec.kind == "principal":
        return in_principal(g, spec.level)
    if spec.kind == "gamma2m":
        two_m = 2 * spec.level
        return (_identity_mod(A, 2) and _identity_mod(D, 2)
                and _zero_mod(B, two_m) and _zero_mod(C, two_m))
    if any(int(x) for x in B.flat) or any(int(x) for x in C.flat):
        raise NotLinearBlock("element of Gamma_l(N) must have B = C = 0")
    return _identity_mod(A, spec.level)


def twist(g) -> np.ndarray:
    """tau(g) g^-1, via the closed form I - [[-2 B tC, 2 B tA], [2 C tD, -2 C tB]].

    This is tau(g) = g - [[0, 2B], [2C, 0]] multiplied by the block inverse;
    every correction term is even.
    """
    g = int_matrix(g)
    A, B, C, D = blocks(g)
    n = A.shape[0]
    corr = from_blocks(-2 * B @ C.T, 2 * B @ A.T, 2 * C @ D.T, -2 * C @ B.T)
    return identity(n) - corr


def factor_beta_u(g, m: int):
    """Split g = beta u with beta in Gamma_2m(2) and u = embed_gl(U), U in GL(n, Z).

    Requires tau(g) g^-1 in Gamma(4m).  U is a lift of A (mod 2).
    """
    g = int_matrix(g)
    if not in_principal(twist(g), 4 * m):
        raise HypothesisFailed(f"tau(g) g^-1 is not in Gamma({4 * m})")
    A = blocks(g)[0]
    U = lift_gl_mod2(A % 2)
    u = embed_gl(U)
    beta = g @ sp_inverse(u)
    if not is_member(beta, gamma2m(m)):
        raise HypothesisFailed("beta fell outside Gamma_2m(2)")
    return beta, u


def _elementary_symmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    S = np.zeros((n, n), dtype=np.int64)
    i, j = rng.integers(n, size=2)
    S[i, j] = S[j, i] = 1
    return int_matrix(S)


def level2_linear_generator(n: int, rng: np.random.Generator) -> np.ndarray:
    """A random element of GL(n, Z) congruent to I modulo 2."""
    U = np.eye(n, dtype=np.int64)
    if n > 1 and rng.random() < 0.7:
        i, j = rng.choice(n, size=2, replace=False)
        U[i, j] = 2 * int(rng.choice([-1, 1]))
    else:
        U = np.diag(rng.choice([-1, 1], size=n)).astype(np.int64)
    return int_matrix(U)


def sample_congruence(spec: CongruenceSpec, word_length: int, seed,
                      n: int | None = None) -> np.ndarray:
    """Random product of ``word_length`` generators of the requested group.

    Gamma(N): upper/lower shears by N * S and their conjugates by random
    Sp(2n, Z) words (Gamma(N) is normal).  Gamma_2m(2): shears by 2m * S and
    embedded level-2 elements of GL(n, Z).  Membership is re-checked.
    """
    n = spec.n if n is None else n
    if n is None:
        raise ValueError("rank n is required")
    if spec.kind == "linear":
        raise ValueError("sampling is only provided for gamma and gamma2m specs")
    rng = np.random.default_rng(seed)
    g = identity(n)
    for _ in range(word_length):
        choice = rng.integers(3)
        if spec.kind == "principal":
            N = spec.level
            S = N * random_symmetric_int(n, rng, bound=1)
            step = translation(S) if choice == 0 else lower_shear(S)
            if choice == 2:
                c = random_sp_int(n, rng, length=2)
                step = c @ translation(N * _elementary_symmetric(n, rng)) @ sp_inverse(c)
        else:
            two_m = 2 * spec.level
            if choice == 0:
                step = translation(two_m * random_symmetric_int(n, rng, bound=1))
            elif choice == 1:
                step = lower_shear(two_m * random_symmetric_int(n, rng, bound=1))
            else:
                step = embed_gl(level2_linear_generator(n, rng))
        g = g @ step
    if not is_member(g, spec):
        raise AssertionError("sampler produced a non-member")
    return g
