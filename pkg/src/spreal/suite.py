"""Property batteries behind ``verify-suite``.

Each property takes a generator and a sample count and raises
AssertionError (with the failing sample index) on the first violation.
The smoke scale runs 20 samples per property, the full scale the counts
listed in PROPERTIES.  Every property gets its own seed, derived from the
suite seed and the property index, and the seed is reported.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import congruence, symplectic
from .boundary import (
    BoundaryPair,
    in_parabolic,
    j_matrix,
    killer_witness,
    normalize_pair,
    nu,
    plant_pair,
    random_unipotent,
    hermitian_embed,
    linear_embed,
)
from .congruence import (
    factor_beta_u,
    gamma2m,
    in_principal,
    is_member,
    principal,
    sample_congruence,
)
from .enumeration import (
    build_finite_sp,
    classify,
    exhaustive_sl2,
    h1_double_cosets,
    omega_not_real_check,
    sl2_real_components,
)
from .galois import (
    cocycle_conditions,
    coboundary_residual,
    real_locus,
    trivialize,
    unitary_split,
    unitary_split_residual,
)
from .involution import (
    normalize_involution,
    normalize_involution_block,
    random_instance,
    random_nonexact_instance,
)
from .linalg import (
    det,
    identity as eye,
    int_matrix,
    lift_gl_mod2,
    primitive_extend,
    smith_normal_form,
    unimodular_inverse,
)
from .moduli import (
    RealStructure,
    comessatti_search,
    gamma_level_equivalence_check,
    isomorphism_from_matrix,
    kappa_checks,
    preserves_level,
    real_pair,
)
from .symplectic import (
    act,
    blocks,
    embed_gl,
    identity,
    is_symplectic,
    random_sp_int,
    random_sp_real,
    random_unimodular,
    sp_inverse,
    tau_point,
    theta,
    translation,
)

SMOKE_SAMPLES = 20


def _check(cond, i, what):
    if not cond:
        raise AssertionError(f"sample {i}: {what}")


# exact linear algebra

def prop_snf(rng, count):
    for i in range(count):
        r, c = rng.integers(1, 7, size=2)
        M = int_matrix(rng.integers(-20, 21, size=(r, c)))
        s = smith_normal_form(M)
        _check(np.array_equal(s.U @ M @ s.V, s.D), i, "U M V != D")
        d = s.diagonal
        _check(all(d[j + 1] % d[j] == 0 for j in range(len(d) - 1) if d[j]), i, "divisibility chain")
        _check(abs(det(s.U)) == 1 and abs(det(s.V)) == 1, i, "transforms not unimodular")


def prop_unimodular_inverse(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 7))
        M = random_unimodular(n, rng)
        Mi = unimodular_inverse(M)
        _check(np.array_equal(M @ Mi, eye(n)) and np.array_equal(Mi @ M, eye(n)), i, "not an inverse")


def prop_lift_mod2(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 9))
        A = random_unimodular(n, rng) % 2
        L = lift_gl_mod2(A)
        _check(np.array_equal(L % 2, A) and abs(det(L)) == 1, i, "bad lift")


def prop_primitive_extend(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 9))
        v = rng.integers(-10**6, 10**6 + 1, size=n)
        v[int(rng.integers(n))] = 1  # primitive
        P = primitive_extend(int_matrix(v))
        _check(abs(det(P)) == 1 and np.array_equal(P[:, 0], int_matrix(v)[0]), i, "bad extension")


# symplectic core

def prop_sp_group(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 4))
        g = random_sp_int(n, rng, length=int(rng.integers(1, 13)))
        _check(is_symplectic(g), i, "not symplectic")
        _check(np.array_equal(g @ sp_inverse(g), identity(n)), i, "inverse")
        t, th = symplectic.tau(g), theta(g)
        _check(np.array_equal(symplectic.tau(t), g) and np.array_equal(theta(th), g), i, "involution")
        _check(np.array_equal(symplectic.tau(th), theta(t)), i, "tau theta != theta tau")
        if np.array_equal(t, g):
            _, B, C, _ = blocks(g)
            _check(not np.any(B) and not np.any(C), i, "tau-fixed with B, C != 0")


def prop_action(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 4))
        g, h = random_sp_real(n, rng), random_sp_real(n, rng)
        Z = act(random_sp_real(n, rng), 1j * np.eye(n))
        lhs, rhs = act(g @ h, Z), act(g, act(h, Z))
        _check(np.max(np.abs(lhs - rhs)) <= 1e-8 * max(1.0, np.max(np.abs(lhs))), i, "not a left action")
        e = np.max(np.abs(tau_point(act(g, Z)) - act(symplectic.tau(g), tau_point(Z))))
        _check(e <= 1e-8 * max(1.0, np.max(np.abs(lhs))), i, "tau equivariance")


# congruence subgroups

def prop_twist_closed_form(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 4))
        g = random_sp_int(n, rng, length=4)
        generic = symplectic.tau(g) @ sp_inverse(g)
        _check(np.array_equal(congruence.twist(g), generic), i, "closed form twist != tau(g) g^-1")


def prop_divisibility_1(rng, count):
    for m in (1, 2, 3):
        for i in range(count):
            n = int(rng.integers(1, 4))
            g = sample_congruence(principal(m), 3, int(rng.integers(2**32)), n)
            _check(in_principal(congruence.twist(g), 2 * m), i, f"twist not in Gamma({2 * m})")


def prop_divisibility_2(rng, count):
    for i in range(count):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        g = sample_congruence(principal(2 * m), 3, int(rng.integers(2**32)), n)
        _check(in_principal(symplectic.tau(g) @ g, 4 * m), i, f"tau(g) g not in Gamma({4 * m})")


def prop_divisibility_3(rng, count):
    for i in range(count):
        m = int(rng.integers(1, 3))
        n = int(rng.integers(1, 4))
        beta = sample_congruence(gamma2m(m), 3, int(rng.integers(2**32)), n)
        g = beta @ embed_gl(random_unimodular(n, rng))
        _check(in_principal(congruence.twist(g), 4 * m), i, "converse: twist not in Gamma(4m)")
        b, u = factor_beta_u(g, m)
        _check(np.array_equal(b @ u, g) and is_member(b, gamma2m(m)), i, "factorization")


# Galois cohomology

def _unitary(n, rng):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def prop_integral_cocycles(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 4))
        gamma = congruence.twist(random_sp_int(n, rng, length=3))
        _check(all(cocycle_conditions(gamma).values()), i, "cocycle conditions")


def prop_unitary_split(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 5))
        d0 = _unitary(n, rng)
        U = np.conj(d0) @ np.linalg.inv(d0)
        _check(unitary_split_residual(U, unitary_split(U)) <= 1e-9, i, "unitary split residual")


def prop_trivialize(rng, count):
    for n in (1, 2, 3, 4):
        for i in range(count):
            g0 = random_sp_real(n, rng)
            gamma = symplectic.tau(g0) @ sp_inverse(g0)
            t = trivialize(gamma)
            _check(coboundary_residual(gamma, t.witness) <= 1e-8, i, f"n={n} residual {t.residual:.2e}")


def prop_witness_ambiguity(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 5))
        g0 = random_sp_real(n, rng)
        gamma = symplectic.tau(g0) @ sp_inverse(g0)
        s1, s2 = rng.integers(2**32, size=2)
        g1 = real_locus(gamma, seed=int(s1), samples=1).witness
        g2 = real_locus(gamma, seed=int(s2), samples=1).witness
        _, B, C, _ = blocks(sp_inverse(g2) @ g1)
        _check(max(np.max(np.abs(B)), np.max(np.abs(C))) <= 1e-7, i, "g'^-1 g not linear")


# involution normal form

def prop_involution(rng, count):
    for n in range(1, 7):
        for k in (2, 3, 4):
            for i in range(count):
                A = random_instance(n, k, rng, exact=i % 2 == 0)
                normalize_involution(A, k)  # verifies the congruence exactly
            for i in range(max(1, count // 10)):
                if n >= 2:
                    normalize_involution(random_nonexact_instance(n, k, rng), k)


def prop_involution_signs(rng, count):
    for i in range(count):
        n, k = int(rng.integers(1, 7)), int(rng.integers(2, 5))
        A = random_instance(n, k, rng)
        P = random_unimodular(n, rng, spread=1)
        _, s1 = normalize_involution(A, k)
        _, s2 = normalize_involution(P @ A @ unimodular_inverse(P), k)
        _check(sorted(s1) == sorted(s2), i, "sign multiset changed under conjugation")


def prop_involution_block(rng, count):
    for i in range(count):
        n, k = int(rng.integers(1, 7)), int(rng.integers(2, 5))
        q = int(rng.integers(0, n + 1))
        A = random_instance(n, k, rng, q=q)
        p, signs = normalize_involution_block(A, k, q)
        _check(np.array_equal(p[:q, :q], eye(q)) and not np.any(p[:q, q:]), i, "block form lost")


# boundary components

def prop_j_matrix(rng, count):
    for n in range(1, 6):
        for r in range(n + 1):
            j = j_matrix(r, n)
            d = [1] * r + [-1] * (n - r)
            _check(np.array_equal(symplectic.tau(j), sp_inverse(j)), r, "tau(j) != j^-1")
            _check(np.array_equal(j @ j, int_matrix(np.diag(d + d))), r, "j^2")


def prop_nu(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 5))
        q = int(rng.integers(0, n + 1))

        def elem():
            h = hermitian_embed(random_sp_int(q, rng, length=2), n) if q else identity(n)
            if n > q:
                h = h @ linear_embed(random_unimodular(n - q, rng), n) @ random_unipotent(n, q, rng)
            return h
        a, b = elem(), elem()
        _check(in_parabolic(a @ b, q), i, "P_q not closed")
        _check(np.array_equal(nu(a @ b, q), nu(a, q) @ nu(b, q)), i, "nu not multiplicative")
        _check(np.array_equal(nu(symplectic.tau(a), q), symplectic.tau(nu(a, q))), i, "nu tau")


def prop_killer(rng, count):
    for i in range(count):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        r = int(rng.integers(0, n + 1))
        j = j_matrix(r, n)
        beta = sample_congruence(gamma2m(m), 2, int(rng.integers(2**32)), n)
        g = beta @ embed_gl(random_unimodular(n, rng)) @ sp_inverse(j)
        v = sample_congruence(principal(4 * m), 1, int(rng.integers(2**32)), n)
        u = sp_inverse(j) @ v @ sp_inverse(j)
        kw = killer_witness(g, u, r, m)
        _check(kw.identity_holds and in_principal(kw.omega, 4 * m), i, "killer witness")


def prop_normalize_pair(rng, count):
    for i in range(count):
        bp, _ = plant_pair(2, 1, 1, rng, word_length=4)
        res = normalize_pair(bp, search_bound=6)
        _check(all(res.checks.values()), i, "normalize_pair checks")


# moduli

def _mixed_pair(rng, i):
    n = int(rng.integers(1, 4))
    if i % 2:
        g = sample_congruence(gamma2m(1), 3, int(rng.integers(2**32)), n)
    else:
        g = random_sp_int(n, rng, length=2)
    return real_pair(g)


def prop_real_structure(rng, count):
    for i in range(count):
        gamma, Z = _mixed_pair(rng, i)
        lhs, rhs = gamma_level_equivalence_check(gamma, Z, 4)
        _check(lhs == rhs, i, f"membership {lhs} but level compatibility {rhs}")
        ch = kappa_checks(RealStructure(gamma, Z), rng, samples=3)
        scale = max(1.0, float(np.max(np.abs(Z)))) ** 2
        _check(ch["antilinear"] <= 1e-8 * scale and ch["involutive"] <= 1e-8 * scale, i, "kappa")
        _check(ch["polarization_reversing"] <= 1e-8 * scale ** 2, i, "polarization")
        _check(ch["lattice_integrality"] <= 1e-7 and ch["diagram"] <= 1e-7, i, "lattice")


def prop_isomorphism(rng, count):
    for i in range(count):
        n = int(rng.integers(1, 4))
        h = random_sp_int(n, rng, length=3)
        Z = act(random_sp_int(n, rng, length=2), 1j * np.eye(n))
        iso = isomorphism_from_matrix(h, Z, rng)
        scale = max(1.0, float(np.max(np.abs(h))), float(np.max(np.abs(Z))))
        _check(iso.diagram_residual <= 1e-8 * scale ** 2, i, "diagram")
        N = int(rng.choice([2, 3, 4]))
        if preserves_level(h, Z, N):
            _check(in_principal(h, N), i, "level preserved but h not in Gamma(N)")


def prop_comessatti(rng, count):
    for i in range(count):
        h0 = random_sp_int(1, rng, length=2)
        Z = act(h0, np.array([[0.5 + 1j]]))
        gamma = symplectic.tau(h0) @ translation(int_matrix([[-1]])) @ sp_inverse(h0)
        res = comessatti_search(Z, gamma, bound=6)
        _check(np.max(np.abs(2 * res.Z.real - np.round(2 * res.Z.real))) <= 1e-7, i, "2X not integral")


# enumeration

def prop_finite_groups(rng, count):
    for N in (2, 4, 8):
        _check(len(build_finite_sp(1, N)) == len(exhaustive_sl2(N)), N, "|Sp(2, Z/N)|")
    _check(sl2_real_components() == 3, 0, "component count")
    _check(omega_not_real_check(), 0, "omega is real")


def prop_h1_n1(rng, count):
    table = h1_double_cosets(1, 1)
    _check(table.cardinality == 4, 0, f"cardinality {table.cardinality}")
    _check(sum(table.orbit_sizes) == table.subset_size, 0, "orbit sizes")
    seen = set()
    for i in range(count):
        beta = sample_congruence(gamma2m(1), 3, int(rng.integers(2**32)), 1)
        g = beta @ embed_gl(int_matrix([[int(rng.choice([-1, 1]))]]))
        b, _ = factor_beta_u(g, 1)
        seen.add(classify(table, np.asarray(b, dtype=np.int64)))
    _check(len(seen) <= table.cardinality, 0, "more witnesses than cosets")


@dataclass
class Property:
    name: str
    func: object
    full: int


PROPERTIES = [
    Property("snf_identity", prop_snf, 200),
    Property("unimodular_inverse", prop_unimodular_inverse, 200),
    Property("lift_gl_mod2", prop_lift_mod2, 200),
    Property("primitive_extend", prop_primitive_extend, 200),
    Property("sp_group_laws", prop_sp_group, 500),
    Property("left_action_and_tau_equivariance", prop_action, 200),
    Property("twist_closed_form", prop_twist_closed_form, 200),
    Property("divisibility_twist", prop_divisibility_1, 200),
    Property("divisibility_tau_product", prop_divisibility_2, 200),
    Property("divisibility_factorization", prop_divisibility_3, 200),
    Property("integral_cocycle_conditions", prop_integral_cocycles, 200),
    Property("unitary_split", prop_unitary_split, 100),
    Property("sp_trivialize", prop_trivialize, 100),
    Property("witness_ambiguity", prop_witness_ambiguity, 50),
    Property("involution_normal_form", prop_involution, 200),
    Property("involution_sign_multiset", prop_involution_signs, 100),
    Property("involution_block_form", prop_involution_block, 200),
    Property("j_matrix_identities", prop_j_matrix, 1),
    Property("nu_homomorphism", prop_nu, 500),
    Property("killer_witness", prop_killer, 200),
    Property("normalize_pair_recover", prop_normalize_pair, 50),
    Property("real_structure_level_equivalence", prop_real_structure, 200),
    Property("isomorphism_diagram_and_level", prop_isomorphism, 200),
    Property("comessatti_search", prop_comessatti, 30),
    Property("finite_groups_and_components", prop_finite_groups, 1),
    Property("h1_table_n1_m1", prop_h1_n1, 100),
]


@contextmanager
def mutated_tau():
    """Replace tau by a version that forgets to negate the C block."""
    original = symplectic.tau

    def bad(g):
        g = np.asarray(g)
        n = symplectic.rank_of(g)
        out = g.copy()
        out[:n, n:] = -out[:n, n:]
        return out

    symplectic.tau = bad
    try:
        yield
    finally:
        symplectic.tau = original


def run_property(prop: Property, count: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    try:
        prop.func(rng, count)
        ok, detail = True, ""
    except Exception as exc:  # a crash is a failure too
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return {
        "name": prop.name,
        "passed": ok,
        "samples": count,
        "seed": seed,
        "detail": detail,
    }


def verify_suite(scale: str = "smoke", seed: int = 0, only: list | None = None,
                 canary: bool = False) -> dict:
    if scale not in ("smoke", "full"):
        raise ValueError("scale must be smoke or full")
    results = []
    with mutated_tau() if canary else _nothing():
        for idx, prop in enumerate(PROPERTIES):
            if only and prop.name not in only:
                continue
            count = min(prop.full, SMOKE_SAMPLES) if scale == "smoke" else prop.full
            results.append(run_property(prop, count, seed * 1000 + idx))
    return {"scale": scale, "seed": seed, "canary": canary,
            "passed": all(r["passed"] for r in results), "properties": results}


@contextmanager
def _nothing():
    yield
