"""Exact integer matrix arithmetic.

Integer matrices are numpy arrays of ``dtype=object`` holding Python ints, so
products never overflow.  The Smith normal form works on plain lists
internally and records the inverse transforms as it goes, which gives
unimodular inversion and basis extension for free.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import NotInvertibleMod2, NotPrimitive, NotUnimodular


def int_matrix(data) -> np.ndarray:
    """Coerce nested lists or an array to an object array of Python ints."""
    # dtype=object keeps Python ints intact; plain asarray would turn values
    # just above the int64 range into float64
    arr = np.array(data, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        if isinstance(x, (float, np.floating)) and not float(x).is_integer():
            raise ValueError(f"non-integral entry {x!r}")
        if isinstance(x, (complex, np.complexfloating, str)):
            raise ValueError(f"non-integral entry {x!r}")
        out[idx] = int(x)
    return out


def identity(n: int) -> np.ndarray:
    return int_matrix(np.eye(n, dtype=np.int64))


def zeros(r: int, c: int | None = None) -> np.ndarray:
    return int_matrix(np.zeros((r, r if c is None else c), dtype=np.int64))


def is_integral(M) -> bool:
    return np.asarray(M).dtype == object or np.issubdtype(np.asarray(M).dtype, np.integer)


def _rows(M) -> list[list[int]]:
    return [[int(x) for x in row] for row in np.asarray(M)]


def det(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = _rows(M)
    n = len(a)
    if n == 0:
        return 1
    if any(len(row) != n for row in a):
        raise ValueError("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class ResidueMatrix:
    """A matrix of residues modulo ``modulus`` with entries in [0, modulus)."""

    modulus: int
    entries: np.ndarray

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        ent = int_matrix(self.entries) % self.modulus
        object.__setattr__(self, "entries", ent)

    @classmethod
    def reduce(cls, M, modulus: int) -> "ResidueMatrix":
        return cls(modulus, int_matrix(M))

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class SNFDecomposition:
    """``U @ M @ V == D`` with U, V unimodular and D in Smith form.

    ``U_inv`` and ``V_inv`` are carried along because the elimination
    produces them at no extra cost.
    """

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    U_inv: np.ndarray
    V_inv: np.ndarray

    @property
    def diagonal(self) -> list[int]:
        k = min(self.D.shape)
        return [int(self.D[i, i]) for i in range(k)]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


class _Elimination:
    # row/column operations applied simultaneously to the working matrix and
    # to the four transform matrices
    def __init__(self, a):
        self.a = a
        r, c = len(a), (len(a[0]) if a else 0)
        self.r, self.c = r, c
        self.U = [[int(i == j) for j in range(r)] for i in range(r)]
        self.Ui = [[int(i == j) for j in range(r)] for i in range(r)]
        self.V = [[int(i == j) for j in range(c)] for i in range(c)]
        self.Vi = [[int(i == j) for j in range(c)] for i in range(c)]

    def row_add(self, i, j, q):
        # row_i += q * row_j
        if q == 0:
            return
        for M in (self.a, self.U):
            ri, rj = M[i], M[j]
            for t in range(len(ri)):
                ri[t] += q * rj[t]
        for row in self.Ui:
            row[j] -= q * row[i]

    def row_swap(self, i, j):
        if i == j:
            return
        for M in (self.a, self.U):
            M[i], M[j] = M[j], M[i]
        for row in self.Ui:
            row[i], row[j] = row[j], row[i]

    def row_neg(self, i):
        for M in (self.a, self.U):
            M[i] = [-x for x in M[i]]
        for row in self.Ui:
            row[i] = -row[i]

    def col_add(self, i, j, q):
        # col_i += q * col_j
        if q == 0:
            return
        for M in (self.a, self.V):
            for row in M:
                row[i] += q * row[j]
        ri, rj = self.Vi[j], self.Vi[i]
        for t in range(len(ri)):
            ri[t] -= q * rj[t]

    def col_swap(self, i, j):
        if i == j:
            return
        for M in (self.a, self.V):
            for row in M:
                row[i], row[j] = row[j], row[i]
        self.Vi[i], self.Vi[j] = self.Vi[j], self.Vi[i]


def smith_normal_form(M) -> SNFDecomposition:
    """Smith normal form with transforms.

    Pivot choice is the smallest nonzero absolute value in the active block
    (first in row-major order on ties); rows are cleared before columns.
    Diagonal entries come out nonnegative with d1 | d2 | ... .
    """
    M = np.asarray(M)
    r, c = M.shape
    e = _Elimination(_rows(M))
    a = e.a
    for t in range(min(r, c)):
        while True:
            piv = None
            for i in range(t, r):
                for j in range(t, c):
                    x = a[i][j]
                    if x and (piv is None or abs(x) < abs(a[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                break
            e.row_swap(t, piv[0])
            e.col_swap(t, piv[1])
            p = a[t][t]
            clean = True
            for i in range(t + 1, r):
                if a[i][t]:
                    e.row_add(i, t, -(a[i][t] // p))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, c):
                if a[t][j]:
                    e.col_add(j, t, -(a[t][j] // p))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, r) for j in range(t + 1, c) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            e.row_add(t, bad, 1)
        if t < r and t < c and a[t][t] < 0:
            e.row_neg(t)
    return SNFDecomposition(
        U=int_matrix(e.U) if r else zeros(0),
        D=int_matrix(a) if r and c else int_matrix(np.zeros((r, c), dtype=np.int64)),
        V=int_matrix(e.V) if c else zeros(0),
        U_inv=int_matrix(e.Ui) if r else zeros(0),
        V_inv=int_matrix(e.Vi) if c else zeros(0),
    )


def unimodular_inverse(M) -> np.ndarray:
    """Exact inverse of an integer matrix with determinant +-1."""
    M = int_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise NotUnimodular("matrix is not square")
    if M.shape[0] == 0:
        return zeros(0)
    snf = smith_normal_form(M)
    if snf.diagonal != [1] * M.shape[0]:
        raise NotUnimodular(f"|det| = {abs(det(M))}, expected 1")
    # U M V = I  =>  M^-1 = V U
    return snf.V @ snf.U


def kernel_basis(M) -> np.ndarray:
    """Columns form a basis of the integer kernel {x : M x = 0}.

    Each column is primitive since it is a column of a unimodular matrix.
    """
    M = int_matrix(M)
    snf = smith_normal_form(M)
    return snf.V[:, snf.rank:]


def primitive_extend(v) -> np.ndarray:
    """Unimodular matrix whose first column is the primitive vector ``v``."""
    col = int_matrix(np.asarray(v).reshape(-1, 1))
    g = 0
    for x in col[:, 0]:
        g = gcd(g, int(x))
    if g != 1:
        raise NotPrimitive(f"gcd of entries is {g}")
    snf = smith_normal_form(col)
    # U v V = e1 with V = (+-1), so v = +-(first column of U^-1)
    P = snf.U_inv.copy()
    P[:, 0] = P[:, 0] * int(snf.V_inv[0, 0])
    return P


def lift_gl_mod2(Abar) -> np.ndarray:
    """A matrix in GL(n, Z) congruent to ``Abar`` modulo 2.

    Entries are first lifted to {0, 1}.  If that lift is not already
    unimodular, its Smith form U L V = diag(d_i) has every d_i odd, so
    U^-1 V^-1 is unimodular and congruent to L modulo 2.
    """
    if isinstance(Abar, ResidueMatrix):
        if Abar.modulus != 2:
            raise ValueError("expected a residue matrix modulo 2")
        Abar = Abar.entries
    L = int_matrix(Abar) % 2
    n = L.shape[0]
    if L.shape != (n, n):
        raise NotInvertibleMod2("matrix is not square")
    d = det(L)
    if d % 2 == 0:
        raise NotInvertibleMod2("determinant is even")
    if abs(d) == 1:
        return L
    snf = smith_normal_form(L)
    return snf.U_inv @ snf.V_inv


def matrix_to_json(M) -> dict:
    M = np.asarray(M)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "entries": [[str(int(x)) for x in row] for row in M],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    entries = obj["entries"]
    if len(entries) != rows or any(len(r) != cols for r in entries):
        raise ValueError("entries do not match the declared shape")
    out = np.empty((rows, cols), dtype=object)
    for i, r in enumerate(entries):
        for j, x in enumerate(r):
            out[i, j] = int(x)
    return out
