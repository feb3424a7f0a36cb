"""Standard boundary components F_q, the parabolic P_q and the witness
constructions for real boundary pairs.

Coordinates are split as (q, n - q | q, n - q).  An element of P_q has
the zero pattern

    [[A, 0, B, *],
     [*, *, *, *],
     [C, 0, D, *],
     [0, 0, 0, *]]

and nu(g) = [[A, B], [C, D]] is its image in Sp(2q).  Everything here is
exact integer arithmetic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .congruence import in_principal, twist
from .errors import BudgetExceeded, HypothesisFailed, NotCocycle, NotFound, NotInParabolic
from .involution import normalize_involution_block
from .linalg import identity as eye, int_matrix, unimodular_inverse, zeros
from .symplectic import (
    blocks,
    check_symplectic,
    embed_gl,
    from_blocks,
    identity,
    rank_of,
    sp_inverse,
    standard_J,
    tau,
    translation,
)


def _check_q(q: int, n: int):
    if not 0 <= q <= n:
        raise ValueError(f"q = {q} out of range for n = {n}")


def _pattern_zero(n: int, q: int):
    # (row slice, col slice) pairs forced to vanish in P_q
    return [
        (slice(0, q), slice(q, n)),
        (slice(n, n + q), slice(q, n)),
        (slice(n + q, 2 * n), slice(0, n + q)),
    ]


def in_parabolic(g, q: int) -> bool:
    """True iff g has the P_q zero pattern."""
    g = int_matrix(g)
    n = rank_of(g)
    _check_q(q, n)
    return all(not any(int(x) for x in g[r, c].flat) for r, c in _pattern_zero(n, q))


def _nu_index(n: int, q: int):
    return list(range(q)) + list(range(n, n + q))


def nu(g, q: int) -> np.ndarray:
    """Hermitian part [[A, B], [C, D]] in Sp(2q, Z) of g in P_q."""
    g = int_matrix(g)
    if not in_parabolic(g, q):
        raise NotInParabolic(f"element is not in P_{q}")
    idx = _nu_index(rank_of(g), q)
    return g[np.ix_(idx, idx)]


def hermitian_embed(h, n: int) -> np.ndarray:
    """Section of nu: h in Sp(2q) placed in G_h inside Sp(2n)."""
    h = int_matrix(h)
    q = rank_of(h)
    _check_q(q, n)
    g = identity(n)
    idx = _nu_index(n, q)
    g[np.ix_(idx, idx)] = h
    return g


def linear_embed(T, n: int) -> np.ndarray:
    """G_l factor diag(I_q, T, I_q, tT^-1) for T in GL(n - q, Z)."""
    T = int_matrix(T)
    q = n - T.shape[0]
    A = eye(n)
    A[q:, q:] = T
    return embed_gl(A)


def unipotent(a, b, d) -> np.ndarray:
    """Element of the unipotent radical of P_q.

    a is (n-q) x q, b is q x (n-q), d is (n-q) x (n-q) with d - a b
    symmetric so that the result is symplectic.
    """
    a, b, d = int_matrix(a), int_matrix(b), int_matrix(d)
    s, q = a.shape
    n = q + s
    g = identity(n)
    g[q:n, 0:q] = a
    g[0:q, n + q:] = b
    g[q:n, n:n + q] = b.T
    g[q:n, n + q:] = d
    g[n:n + q, n + q:] = -a.T
    return check_symplectic(g)


def random_unipotent(n: int, q: int, rng: np.random.Generator, even: int = 1,
                     bound: int = 2) -> np.ndarray:
    """Random element of the unipotent radical with b, d divisible by ``even``."""
    s = n - q
    a = int_matrix(rng.integers(-bound, bound + 1, size=(s, q)))
    b = int_matrix(rng.integers(-bound, bound + 1, size=(q, s))) * even
    sym = rng.integers(-bound, bound + 1, size=(s, s))
    sym = int_matrix(np.triu(sym) + np.triu(sym, 1).T) * even
    return unipotent(a, b, sym + a @ b)


def in_kernel_nu(g, q: int) -> bool:
    return in_parabolic(g, q) and np.array_equal(nu(g, q), identity(q))


def same_component(a, a2, q: int) -> bool:
    """a F_q == a2 F_q, tested as a2^-1 a in P_q."""
    return in_parabolic(sp_inverse(int_matrix(a2)) @ int_matrix(a), q)


def j_matrix(r: int, n: int) -> np.ndarray:
    """j_r in coordinates (r, s | r, s), s = n - r.

    tau(j_r) = j_r^-1 and j_r^2 = diag(I_r, -I_s, I_r, -I_s).
    """
    _check_q(r, n)
    s = n - r
    g = zeros(2 * n)
    for i in range(r):
        g[i, i] = g[n + i, n + i] = 1
    for i in range(s):
        g[r + i, n + r + i] = 1
        g[n + r + i, r + i] = -1
    return g


def _gamma_member(g, m: int) -> bool:
    return in_principal(g, 4 * m)


@dataclass
class KillerWitness:
    omega: np.ndarray
    gamma: np.ndarray
    r: int
    identity_holds: bool


def killer_witness(g, u, r: int, m: int, q: int | None = None) -> KillerWitness:
    """omega = tau(g j_r) (g j_r)^-1 for gamma = tau(g) u g^-1 in Gamma(4m).

    Requires j_r u j_r in Gamma(4m); then omega is in Gamma(4m) and equals
    gamma (g j_r)(j_r u j_r)^-1 (g j_r)^-1.  Both are checked exactly.
    """
    g, u = int_matrix(g), int_matrix(u)
    n = rank_of(g)
    if q is not None and not in_kernel_nu(u, q):
        raise HypothesisFailed(f"u is not in the kernel of nu on P_{q}")
    gamma = tau(g) @ u @ sp_inverse(g)
    if not _gamma_member(gamma, m):
        raise HypothesisFailed(f"tau(g) u g^-1 is not in Gamma({4 * m})")
    j = j_matrix(r, n)
    juj = j @ u @ j
    if not _gamma_member(juj, m):
        raise HypothesisFailed(f"j_r u j_r is not in Gamma({4 * m})")
    gj = g @ j
    omega = tau(gj) @ sp_inverse(gj)
    rhs = gamma @ gj @ sp_inverse(juj) @ sp_inverse(gj)
    ok = bool(np.array_equal(omega, rhs))
    if not ok or not _gamma_member(omega, m):
        raise HypothesisFailed("killer identity failed")
    return KillerWitness(omega=omega, gamma=gamma, r=r, identity_holds=ok)


@dataclass
class BoundaryPair:
    """F = a F_q with gamma in Gamma(4m) and tau(a)^-1 gamma a in P_q."""

    q: int
    a: np.ndarray
    gamma: np.ndarray
    m: int

    def __post_init__(self):
        self.a = int_matrix(self.a)
        self.gamma = int_matrix(self.gamma)
        n = rank_of(self.a)
        _check_q(self.q, n)
        check_symplectic(self.a)
        check_symplectic(self.gamma)
        if not _gamma_member(self.gamma, self.m):
            raise HypothesisFailed(f"gamma is not in Gamma({4 * self.m})")
        if not in_parabolic(self.w, self.q):
            raise NotInParabolic("tau(a)^-1 gamma a does not normalize F_q")

    @property
    def n(self) -> int:
        return rank_of(self.a)

    @property
    def w(self) -> np.ndarray:
        return sp_inverse(tau(self.a)) @ self.gamma @ self.a


def _key(M) -> tuple:
    return tuple(int(x) for x in M.flat)


def sp_generators(q: int) -> list[tuple[str, np.ndarray]]:
    """J, J^-1, T_S (S symmetric with entries in {-1, 0, 1}, S != 0) and
    embedded elementary matrices I +- E_ij and sign changes, in a fixed order.
    """
    gens = [("J", standard_J(q)), ("J^-1", sp_inverse(standard_J(q)))]
    cells = [(i, j) for i in range(q) for j in range(i, q)]
    for vals in product((-1, 0, 1), repeat=len(cells)):
        if not any(vals):
            continue
        S = zeros(q)
        for (i, j), v in zip(cells, vals):
            S[i, j] = S[j, i] = v
        gens.append((f"T{list(vals)}", translation(S)))
    for i in range(q):
        for j in range(q):
            if i != j:
                for e in (1, -1):
                    E = eye(q)
                    E[i, j] = e
                    gens.append((f"E{i}{j}{e:+d}", embed_gl(E)))
        E = eye(q)
        E[i, i] = -1
        gens.append((f"neg{i}", embed_gl(E)))
    return gens


@dataclass
class SearchResult:
    h: np.ndarray
    word: list[str]
    explored: int


def find_splitting(target, search_bound: int, max_nodes: int = 200_000) -> SearchResult:
    """h in Sp(2q, Z) with tau(h) h^-1 == target, by breadth-first search.

    Words grow on the left (h -> s h), so the cocycle c = tau(h) h^-1 moves
    to tau(s) c s^-1 and depends only on c.  Nodes are therefore
    deduplicated by the exact value of c.  Generators are tried in the
    order of ``sp_generators``; the first witness is the shortest word,
    then lexicographic in generator order.
    """
    target = int_matrix(target)
    q = rank_of(target)
    if not np.array_equal(target @ tau(target), identity(q)):
        raise NotCocycle("nu(w) tau(nu(w)) != I")
    gens = [(name, g, tau(g), sp_inverse(g)) for name, g in sp_generators(q)]
    start = identity(q)
    goal = _key(target)
    seen = {_key(start): (None, None)}
    if _key(start) == goal:
        return SearchResult(start, [], 1)
    frontier = deque([(start, start)])  # (cocycle, h)
    for _ in range(search_bound):
        nxt = deque()
        for c, h in frontier:
            for idx, (name, g, tg, gi) in enumerate(gens):
                c2 = tg @ c @ gi
                k = _key(c2)
                if k in seen:
                    continue
                seen[k] = (_key(c), idx)
                h2 = g @ h
                if k == goal:
                    return SearchResult(h2, _word_of(seen, k, gens), len(seen))
                if len(seen) > max_nodes:
                    raise BudgetExceeded(f"splitting search exceeded {max_nodes} nodes")
                nxt.append((c2, h2))
        frontier = nxt
        if not frontier:
            break
    raise NotFound(f"no h with tau(h) h^-1 = target within {search_bound} generators")


def _word_of(seen, key, gens) -> list[str]:
    # word listed left to right, i.e. h = s_1 s_2 ... s_k
    word = []
    while seen[key][1] is not None:
        key, idx = seen[key]
        word.append(gens[idx][0])
    return word


@dataclass
class NormalizedPair:
    """Output of ``normalize_pair``.

    g F_q = F, gamma' in Gamma(4m), u = tau(g)^-1 gamma' g = diag(A, tA^-1)
    in ker(nu), and gamma = gamma' (g u2 g^-1) with u2 a translation in
    Gamma(4m) acting trivially on F_q.
    """

    g: np.ndarray
    gamma_prime: np.ndarray
    u: np.ndarray
    u2: np.ndarray
    h: np.ndarray
    word: list
    checks: dict = field(default_factory=dict)


def normalize_pair(bp: BoundaryPair, search_bound: int = 6,
                   max_nodes: int = 200_000) -> NormalizedPair:
    """Replace (F, gamma) by an equivalent pair whose twist has B = 0."""
    n, q, m = bp.n, bp.q, bp.m
    w = bp.w
    nw = nu(w, q)
    if not np.array_equal(nw @ tau(nw), identity(q)):
        raise NotCocycle("nu(w) does not satisfy nu(w) tau(nu(w)) = I")
    found = find_splitting(nw, search_bound, max_nodes) if q else SearchResult(identity(0), [], 1)
    H = hermitian_embed(found.h, n) if q else identity(n)
    v = sp_inverse(tau(H)) @ w @ H
    if not in_kernel_nu(v, q):
        raise HypothesisFailed("v = tau(h)^-1 w h is not in ker(nu)")
    A, B, C, D = blocks(v)
    if any(int(x) for x in C.flat):
        raise HypothesisFailed("v has a nonzero C block")
    Ainv = unimodular_inverse(A)
    AB = Ainv @ B
    if any(int(x) % 2 for x in AB.flat):
        raise HypothesisFailed("A^-1 B is not even")
    x = translation(-(AB // 2) if AB.size else AB)
    a2 = bp.a @ H
    g = a2 @ x
    u_prime = sp_inverse(tau(x)) @ v @ x
    Ap, Bp, Cp, Dp = blocks(u_prime)
    if any(int(t) for t in Cp.flat) or not np.array_equal(Ap, A):
        raise HypothesisFailed("u' lost its block form")
    if any(int(t) % (4 * m) for t in Bp.flat):
        raise HypothesisFailed(f"B' is not divisible by {4 * m}")
    u = embed_gl(A)
    u2 = sp_inverse(u) @ u_prime
    gamma_p = tau(g) @ u @ sp_inverse(g)
    checks = {
        "g F_q = F": same_component(g, bp.a, q),
        "gamma' in Gamma(4m)": _gamma_member(gamma_p, m),
        "u in ker(nu)": in_kernel_nu(u, q),
        "u2 in Gamma(4m)": _gamma_member(u2, m),
        "u2 in ker(nu)": in_kernel_nu(u2, q),
        "gamma = gamma' g u2 g^-1": bool(np.array_equal(bp.gamma, gamma_p @ g @ u2 @ sp_inverse(g))),
        "u = tau(g)^-1 gamma' g": bool(np.array_equal(u, sp_inverse(tau(g)) @ gamma_p @ g)),
    }
    bad = [k for k, ok in checks.items() if not ok]
    if bad:
        raise HypothesisFailed("normalize_pair verification failed: " + ", ".join(bad))
    return NormalizedPair(g=g, gamma_prime=gamma_p, u=u, u2=u2, h=found.h,
                          word=found.word, checks=checks)


def boundary_reality_residual(g, gamma, q: int, Y_q, t: float = 1e8) -> float:
    """Numerical check that g . phi(i Y_q) is gamma-real.

    The boundary point is approximated by diag(i Y_q, i t I) on the
    F_q side; returns max |tau(Z) - (tau(g)^-1 gamma g) . Z| over the top
    left q x q block.
    """
    from .symplectic import act

    g = np.asarray(g, dtype=float)
    w = sp_inverse(tau(g)) @ np.asarray(gamma, dtype=float) @ g
    n = rank_of(w)
    Z = np.zeros((n, n), dtype=complex)
    Z[:q, :q] = 1j * np.asarray(Y_q, dtype=float)
    Z[q:, q:] = 1j * t * np.eye(n - q)
    W = act(w, Z)
    return float(np.max(np.abs(W[:q, :q] + np.conj(Z[:q, :q])), initial=0.0))


@dataclass
class TwoPowerForm:
    g: np.ndarray
    gamma_prime: np.ndarray
    r: int
    u: np.ndarray
    signs: list


def _sign_pattern(n: int, r: int) -> np.ndarray:
    s = n - r
    d = [1] * r + [-1] * s
    return int_matrix(np.diag(d + d))


def two_power_normal_form(bp: BoundaryPair, k: int, search_bound: int = 6) -> TwoPowerForm:
    """For level 4m = 2^k: g with tau(g)^-1 gamma' g == diag(I_r, -I_s, I_r, -I_s)
    (mod 2^k) and in ker(nu).
    """
    if k < 2 or 4 * bp.m != 2**k:
        raise HypothesisFailed("level must be 2^k with k >= 2 and 4m = 2^k")
    res = normalize_pair(bp, search_bound)
    n, q = bp.n, bp.q
    A = blocks(res.u)[0]
    p, signs = normalize_involution_block(A, k, q)
    h = embed_gl(p)
    g = res.g @ h
    u = sp_inverse(tau(g)) @ res.gamma_prime @ g
    r = sum(1 for e in signs if e == 1)
    if not in_kernel_nu(u, q):
        raise HypothesisFailed("normal form left ker(nu)")
    if any(int(x) % 2**k for x in (u - _sign_pattern(n, r)).flat):
        raise HypothesisFailed("normal form congruence failed")
    return TwoPowerForm(g=g, gamma_prime=res.gamma_prime, r=r, u=u, signs=signs)


@dataclass
class ClosureWitness:
    r: int
    omega: np.ndarray
    sign: int


def corank_one_witness(bp: BoundaryPair, search_bound: int = 6) -> ClosureWitness:
    """For q = n - 1: A = [[I, 0], [a, +-1]] with a == 0 (mod 4m); the
    plus sign gives omega = tau(g) g^-1 (r = n), the minus sign uses
    j_{n-1} (r = n - 1).  omega is checked by ``killer_witness``.
    """
    n, q, m = bp.n, bp.q, bp.m
    if q != n - 1:
        raise HypothesisFailed("corank-one witness needs q = n - 1")
    res = normalize_pair(bp, search_bound)
    A = blocks(res.u)[0]
    if any(int(x) % (4 * m) for x in A[n - 1, : n - 1].flat):
        raise HypothesisFailed(f"last row of A is not divisible by {4 * m}")
    sign = int(A[n - 1, n - 1])
    r = n if sign == 1 else n - 1
    kw = killer_witness(res.g, res.u, r, m, q)
    return ClosureWitness(r=r, omega=kw.omega, sign=sign)


def plant_pair(n: int, q: int, m: int, rng: np.random.Generator, word_length: int = 4,
               conjugate: bool = False) -> tuple[BoundaryPair, np.ndarray]:
    """Random pair with gamma = tau(h0) h0^-1 for h0 in P_q.

    h0 = G_h(word) G_l(T) U with a word of length <= ``word_length`` in the
    search generators whose twist is a nontrivial element of Gamma(4m)
    (identity if none turns up), and b, d of U divisible by 2m.  With
    ``conjugate`` the component is moved by a with tau(a) a^-1 in
    Gamma(4m).
    """
    from .congruence import gamma2m, sample_congruence
    from .symplectic import random_unimodular

    gens = sp_generators(q) if q else []
    hq = identity(q)
    for _ in range(2000 if q else 0):
        cand = identity(q)
        for _ in range(int(rng.integers(1, word_length + 1))):
            cand = cand @ gens[int(rng.integers(len(gens)))][1]
        tw = twist(cand)
        # prefer a word whose cocycle is nontrivial, so the search has work to do
        if in_principal(tw, 4 * m) and not np.array_equal(tw, identity(q)):
            hq = cand
            break
    h0 = hermitian_embed(hq, n) if q else identity(n)
    if n > q:
        h0 = h0 @ linear_embed(random_unimodular(n - q, rng), n)
        h0 = h0 @ random_unipotent(n, q, rng, even=2 * m)
    gamma = tau(h0) @ sp_inverse(h0)
    a = identity(n)
    if conjugate:
        beta = sample_congruence(gamma2m(m), 3, int(rng.integers(2**32)), n=n)
        a = beta @ embed_gl(random_unimodular(n, rng))
        gamma = tau(a) @ gamma @ sp_inverse(a)
    return BoundaryPair(q=q, a=a, gamma=gamma, m=m), h0
