import numpy as np
import pytest

from spreal.congruence import gamma2m, principal, sample_congruence, twist
from spreal.errors import NotCocycle, NotRealPoint, RankInstability
from spreal.galois import (
    coboundary_from_fixed_point,
    coboundary_residual,
    cocycle_conditions,
    is_cocycle,
    locus_residual,
    real_locus,
    simultaneous_diagonalize,
    sp_trivialize,
    trivialize,
    unitary_split,
    unitary_split_residual,
)
from spreal.linalg import int_matrix
from spreal.symplectic import (
    act,
    blocks,
    embed_gl,
    identity,
    random_sp_int,
    random_sp_real,
    sp_inverse,
    standard_J,
    tau,
    translation,
)


def random_unitary(n, rng):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def test_is_cocycle_examples():
    assert is_cocycle(identity(2))
    assert is_cocycle(standard_J(2))
    assert is_cocycle(translation(int_matrix([[1, 2], [2, -3]])))
    assert not is_cocycle(embed_gl(np.diag([2.0, 1.0])), 1e-9)
    assert not is_cocycle(int_matrix([[1, 0], [1, 1]]) @ int_matrix([[1, 1], [0, 1]]))


def test_integral_cocycles_satisfy_block_conditions(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        gamma = twist(random_sp_int(n, rng, length=4))
        assert is_cocycle(gamma)
        assert all(cocycle_conditions(gamma).values())


def test_unitary_split_examples():
    assert unitary_split_residual(np.eye(2), unitary_split(np.eye(2))) <= 1e-12
    d = unitary_split(1j * np.eye(2))
    assert unitary_split_residual(1j * np.eye(2), d) <= 1e-12
    assert np.allclose(d, np.exp(-0.25j * np.pi) * np.eye(2))
    U = np.diag([1.0, -1.0]).astype(complex)
    assert unitary_split_residual(U, unitary_split(U)) <= 1e-12


def test_unitary_split_battery(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        d0 = random_unitary(n, rng)
        U = np.conj(d0) @ np.linalg.inv(d0)
        d = unitary_split(U)
        assert unitary_split_residual(U, d) <= 1e-9
        assert np.allclose(d @ d.conj().T, np.eye(n), atol=1e-10)


def test_unitary_split_rejects_non_cocycle():
    with pytest.raises(NotCocycle):
        unitary_split(np.array([[0, 1], [1j, 0]]))


def test_simultaneous_diagonalize_with_clusters(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    A = Q @ np.diag([1.0, 1.0, 2.0, 2.0]) @ Q.T
    B = Q @ np.diag([3.0, -1.0, 0.5, 0.5]) @ Q.T
    P = simultaneous_diagonalize(A, B)
    for M in (A, B):
        D = P.T @ M @ P
        assert np.max(np.abs(D - np.diag(np.diag(D)))) <= 1e-10


def test_coboundary_from_fixed_point_examples():
    g = coboundary_from_fixed_point(identity(1), np.array([[1j]]))
    assert coboundary_residual(identity(1), g) <= 1e-12
    J = standard_J(2)
    g = coboundary_from_fixed_point(J, 1j * np.eye(2))
    assert coboundary_residual(J, g) <= 1e-8
    X = np.array([[1.0, 0.5], [0.5, -1.0]])
    Y = np.array([[2.0, 0.3], [0.3, 1.0]])
    gamma = translation(-2 * X)
    assert np.allclose(act(gamma, X + 1j * Y), -X + 1j * Y)
    g = coboundary_from_fixed_point(gamma, X + 1j * Y)
    assert coboundary_residual(gamma, g) <= 1e-8


def test_coboundary_errors():
    with pytest.raises(NotRealPoint):
        coboundary_from_fixed_point(standard_J(1), np.array([[2j]]))
    with pytest.raises(NotCocycle):
        coboundary_from_fixed_point(embed_gl(np.array([[2.0]])), np.array([[1j]]))


def test_trivialize_identity():
    t = trivialize(identity(3))
    assert t.rank == 0 and coboundary_residual(identity(3), t.witness) <= 1e-12


def test_trivialize_diagonal_case():
    C = np.diag([2.0, 3.0])
    gamma = np.block([[np.zeros((2, 2)), -np.linalg.inv(C)], [C, np.zeros((2, 2))]])
    t = trivialize(gamma)
    assert t.rank == 2
    assert np.allclose(t.fixed_point, 1j * np.diag([1 / 2, 1 / 3]))
    assert t.residual <= 1e-8


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_generate_and_recover(n, rng):
    for _ in range(100):
        g0 = random_sp_real(n, rng)
        gamma = tau(g0) @ sp_inverse(g0)
        g = sp_trivialize(gamma)
        assert coboundary_residual(gamma, g) <= 1e-8


@pytest.mark.parametrize("n", [2, 3, 4])
def test_every_rank_split(n, rng):
    # tau-conjugates of j-type cocycles: C has rank exactly r
    for r in range(n + 1):
        for _ in range(10):
            x = np.zeros((n, n))
            x[:r, :r] = np.diag(rng.uniform(1, 3, size=r))
            h = embed_gl(np.eye(n) + 0.3 * rng.normal(size=(n, n)), exact=False)
            core = np.eye(2 * n)
            core[:n, n:] = -np.linalg.pinv(x)
            core[n:, :n] = x
            for i in range(r, n):
                core[i, i] = core[n + i, n + i] = 1.0
            for i in range(r):
                core[i, i] = core[n + i, n + i] = 0.0
            gamma = tau(h) @ core @ sp_inverse(h)
            t = trivialize(gamma)
            assert t.rank == r and t.residual <= 1e-8


def test_rank_instability():
    C = np.diag([1.0, 1e-8])
    gamma = np.block([[np.zeros((2, 2)), -np.linalg.inv(C)], [C, np.zeros((2, 2))]])
    with pytest.raises(RankInstability):
        trivialize(gamma)


def test_trivialize_rejects_non_cocycle():
    with pytest.raises(NotCocycle):
        trivialize(int_matrix([[1, 1], [1, 2]]))


def test_real_locus_examples():
    loc = real_locus(identity(2), samples=3)
    _, B, C, _ = blocks(loc.witness)
    assert np.allclose(B, 0) and np.allclose(C, 0)
    assert loc.max_residual <= 1e-10
    J = standard_J(1)
    assert np.allclose(act(J, np.array([[1j]])), np.array([[1j]]))
    assert real_locus(J, seed=3).max_residual <= 1e-8


def test_witness_ambiguity(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        g0 = random_sp_real(n, rng)
        gamma = tau(g0) @ sp_inverse(g0)
        s1, s2 = (int(s) for s in rng.integers(2**32, size=2))
        g1 = real_locus(gamma, seed=s1, samples=1).witness
        g2 = real_locus(gamma, seed=s2, samples=1).witness
        _, B, C, _ = blocks(sp_inverse(g2) @ g1)
        assert max(np.abs(B).max(), np.abs(C).max()) <= 1e-7


def test_loci_of_distinct_torsion_free_elements_are_disjoint(rng):
    # gamma in Gamma(4) (torsion free): a point real for gamma1 is not real for gamma2
    for _ in range(20):
        n = int(rng.integers(1, 3))
        b1 = sample_congruence(gamma2m(1), 3, int(rng.integers(2**32)), n)
        b2 = b1 @ sample_congruence(principal(4), 1, int(rng.integers(2**32)), n)
        g1, g2 = twist(b1), twist(b2)
        if np.array_equal(g1, g2):
            continue
        for Z in real_locus(g1, samples=4).samples:
            assert locus_residual(g1, Z) <= 1e-8
            assert locus_residual(g2, Z) > 1e-6
