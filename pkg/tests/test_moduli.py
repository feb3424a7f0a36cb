import numpy as np
import pytest

from spreal.congruence import gamma2m, in_principal, is_member, sample_congruence, twist
from spreal.errors import NotCocycle, NotFound, NotRealPoint
from spreal.galois import locus_residual
from spreal.linalg import int_matrix
from spreal.moduli import (
    RealStructure,
    comessatti_search,
    gamma_level_equivalence_check,
    hermitian_form,
    isomorphism_from_matrix,
    kappa_checks,
    kappa_lattice_matrix,
    lattice_coords,
    lattice_map,
    level_compatible,
    polarization,
    preserves_level,
    rational_witness,
    real_pair,
)
from spreal.symplectic import (
    act,
    embed_gl,
    identity,
    random_sp_int,
    random_unimodular,
    siegel_point,
    standard_J,
    tau,
    translation,
)


def random_siegel(n, rng):
    X = rng.normal(size=(n, n))
    G = rng.normal(size=(n, n))
    return siegel_point((X + X.T) / 2, G @ G.T + 0.5 * np.eye(n))


def rand_vec(n, rng):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def level2_pair(n, rng, m=1):
    beta = sample_congruence(gamma2m(m), 3, int(rng.integers(2**32)), n=n)
    return real_pair(beta @ embed_gl(random_unimodular(n, rng)))


def test_hermitian_form_at_i():
    Z = 1j * np.eye(2)
    u, v = np.array([1, 2j]), np.array([3, 1 - 1j])
    assert np.isclose(hermitian_form(Z, u, v), u @ np.conj(v))


def test_hermitian_form_positive_and_polarization(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        Z = random_siegel(n, rng)
        u, v = rand_vec(n, rng), rand_vec(n, rng)
        assert hermitian_form(Z, u, u).real > 0
        H = hermitian_form(Z, u, v)
        assert np.isclose(np.conj(H), hermitian_form(Z, v, u))
        # Im H is the polarization Q0 pulled back through F_Z
        assert np.isclose(H.imag, polarization(Z, u, v), atol=1e-8 * max(1, abs(H)))


def test_lattice_coords_inverts_lattice_map(rng):
    Z = random_siegel(3, rng)
    p = rng.normal(size=6)
    assert np.allclose(lattice_coords(Z, lattice_map(Z) @ p), p)


def test_polarization_integral_on_lattice(rng):
    Z = random_siegel(2, rng)
    F = lattice_map(Z)
    for i in range(4):
        for j in range(4):
            assert np.isclose(polarization(Z, F[:, i], F[:, j]), np.round(polarization(Z, F[:, i], F[:, j])))


def test_kappa_identity_is_conjugation():
    Z = 1j * np.eye(2)
    rs = RealStructure(identity(2), Z)
    M = np.array([1 + 2j, -3j])
    assert np.allclose(rs.apply(M), np.conj(M))
    assert np.allclose(kappa_lattice_matrix(rs), np.diag([-1, -1, 1, 1]))


def test_kappa_properties(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        gamma, Z = real_pair(random_sp_int(n, rng, length=4))
        rs = RealStructure(gamma, Z)
        c = kappa_checks(rs, rng)
        scale = max(1.0, float(np.max(np.abs(Z))))
        assert c["antilinear"] <= 1e-8 * scale
        assert c["involutive"] <= 1e-7 * scale**2
        assert c["polarization_reversing"] <= 1e-8 * scale**4
        assert c["lattice_integrality"] <= 1e-7 and c["diagram"] <= 1e-7


def test_real_structure_errors():
    with pytest.raises(NotRealPoint):
        RealStructure(standard_J(1), np.array([[2j]]))
    with pytest.raises(NotCocycle):
        RealStructure(embed_gl(np.array([[2.0]])), np.array([[1j]]))


def test_level_compatible_examples():
    Z = 1j * np.eye(2)
    for N in (2, 3, 4, 8):
        assert level_compatible(RealStructure(identity(2), Z), N)
    X = int_matrix([[1, 0], [0, 0]])
    Zx = siegel_point(np.array([[1.0, 0], [0, 0]]), np.eye(2))
    gamma = translation(-2 * X)
    assert locus_residual(gamma, Zx) <= 1e-12
    assert not level_compatible(RealStructure(gamma, Zx), 4)
    assert gamma_level_equivalence_check(gamma, Zx, 4) == (False, False)
    assert gamma_level_equivalence_check(gamma, Zx, 2) == (True, True)


def test_level_equivalence_battery(rng):
    seen = set()
    for i in range(200):
        n = int(rng.integers(1, 4))
        gamma, Z = level2_pair(n, rng) if i % 2 else real_pair(random_sp_int(n, rng, length=3))
        for N in (2, 4):
            lhs, rhs = gamma_level_equivalence_check(gamma, Z, N)
            assert lhs == rhs
            seen.add(lhs)
    assert seen == {True, False}


def test_isomorphism_examples():
    Z = siegel_point(np.array([[0.3]]), np.array([[1.2]]))
    iso = isomorphism_from_matrix(identity(1), Z)
    assert np.allclose(iso.psi, np.eye(1)) and np.allclose(iso.Omega, Z)
    iso = isomorphism_from_matrix(translation(int_matrix([[2]])), Z)
    assert np.allclose(iso.Omega, Z + 2) and np.allclose(iso.psi, np.eye(1))


def test_isomorphism_battery(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        h = random_sp_int(n, rng, length=3)
        Z = random_siegel(n, rng)
        iso = isomorphism_from_matrix(h, Z, rng)
        scale = max(1.0, float(np.max(np.abs(h)))) ** 2
        assert iso.diagram_residual <= 1e-8 * scale
        assert iso.form_residual <= 1e-8 * scale
        for N in (2, 3, 4):
            assert preserves_level(h, Z, N) == in_principal(h, N)


def test_comessatti_examples():
    assert comessatti_search(1j * np.eye(2)).word == []
    assert comessatti_search(np.array([[0.5 + 1j]])).word == []
    with pytest.raises(NotFound):
        comessatti_search(np.array([[1 / 3 + 1j]]), bound=0)


def test_comessatti_planted(rng):
    for _ in range(30):
        n = int(rng.integers(1, 3))
        gamma, Z = real_pair(random_sp_int(n, rng, length=2))
        res = comessatti_search(Z, gamma=gamma, bound=6)
        W = act(res.h, Z)
        assert np.max(np.abs(2 * W.real - np.round(2 * W.real))) <= 1e-7


def test_comessatti_rejects_non_real_point():
    with pytest.raises(NotRealPoint):
        comessatti_search(np.array([[2j]]), gamma=standard_J(1))


def test_rational_witness(rng):
    found = 0
    for _ in range(20):
        gamma, Z = level2_pair(1, rng)
        try:
            beta = rational_witness(gamma, 1)
        except NotFound:
            continue
        found += 1
        assert is_member(beta, gamma2m(1)) and np.array_equal(twist(beta), gamma)
        assert locus_residual(gamma, act(beta, 1j * np.eye(1))) <= 1e-8
    assert found > 0
