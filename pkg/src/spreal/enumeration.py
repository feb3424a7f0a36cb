"""Finite quotients Sp(2n, Z/N), congruence subsets and double coset tables.

Residue matrices are stored as int64 keys: the entries in row-major order
are the base-N digits, most significant first, so comparing keys compares
entries lexicographically.  Closures are computed by breadth-first search
with vectorized products over frontier batches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, GeneratorUncertainty
from .linalg import int_matrix, unimodular_inverse

CODE_VERSION = "1"
DEFAULT_CAP = 2**22
BATCH = 20_000


def _check_encodable(d: int, N: int):
    if N < 1:
        raise ValueError("N must be positive")
    if N > 1 and (d * d) * np.log2(N) >= 63:
        raise ValueError(f"residue matrices of size {d} mod {N} do not fit in 63 bits")


def encode(mats, N: int) -> np.ndarray:
    """Keys of an array of residue matrices of shape (k, d, d)."""
    mats = np.asarray(mats, dtype=np.int64) % N
    flat = mats.reshape(len(mats), -1)
    key = np.zeros(len(mats), dtype=np.int64)
    for col in flat.T:
        key = key * N + col
    return key


def decode(keys, N: int, d: int) -> np.ndarray:
    keys = np.array(keys, dtype=np.int64)
    out = np.empty((len(keys), d * d), dtype=np.int64)
    for i in range(d * d - 1, -1, -1):
        out[:, i] = keys % N
        keys = keys // N
    return out.reshape(-1, d, d)


def _sp_J(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n), dtype=np.int64)
    J[:n, n:] = np.eye(n, dtype=np.int64)
    J[n:, :n] = -np.eye(n, dtype=np.int64)
    return J


def _translation(S) -> np.ndarray:
    n = len(S)
    g = np.eye(2 * n, dtype=np.int64)
    g[:n, n:] = S
    return g


def _lower(S) -> np.ndarray:
    n = len(S)
    g = np.eye(2 * n, dtype=np.int64)
    g[n:, :n] = S
    return g


def _embed(U) -> np.ndarray:
    U = np.asarray(U, dtype=np.int64)
    n = len(U)
    g = np.zeros((2 * n, 2 * n), dtype=np.int64)
    g[:n, :n] = U
    g[n:, n:] = np.asarray(unimodular_inverse(int_matrix(U)).T, dtype=np.int64)
    return g


def _elementary_symmetric(n: int):
    for i in range(n):
        for j in range(i, n):
            S = np.zeros((n, n), dtype=np.int64)
            S[i, j] = S[j, i] = 1
            yield (i, j), S


def sp_generators_mod(n: int) -> list[tuple[str, np.ndarray]]:
    """J, T_S and embedded elementary matrices; they generate Sp(2n, Z)."""
    gens = [("J", _sp_J(n))]
    for (i, j), S in _elementary_symmetric(n):
        gens.append((f"T{i}{j}", _translation(S)))
    for i in range(n):
        for j in range(n):
            if i != j:
                U = np.eye(n, dtype=np.int64)
                U[i, j] = 1
                gens.append((f"E{i}{j}", _embed(U)))
    return gens


def closure(generators, N: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Sorted keys of the monoid (hence group) generated mod N.

    Raises BudgetExceeded once more than ``cap`` elements are found.
    """
    G = np.array([np.asarray(g, dtype=np.int64) % N for g in generators])
    d = G.shape[1]
    _check_encodable(d, N)
    start = np.eye(d, dtype=np.int64)[None] % N
    seen = encode(start, N)
    frontier = start
    while len(frontier):
        fresh = []
        for lo in range(0, len(frontier), BATCH):
            block = frontier[lo:lo + BATCH]
            prods = np.einsum("kij,gjl->kgil", block, G) % N
            prods = prods.reshape(-1, d, d)
            keys, idx = np.unique(encode(prods, N), return_index=True)
            pos = np.searchsorted(seen, keys)
            pos[pos == len(seen)] = 0
            new = seen[pos] != keys
            keys, idx = keys[new], idx[new]
            if len(keys):
                seen = np.union1d(seen, keys)
                fresh.append(prods[idx])
            if len(seen) > cap:
                raise BudgetExceeded(f"closure exceeded {cap} elements")
        frontier = np.concatenate(fresh) if fresh else np.empty((0, d, d), dtype=np.int64)
    return seen


def _contains(sorted_keys, keys) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    pos = np.searchsorted(sorted_keys, keys)
    pos[pos == len(sorted_keys)] = 0
    return sorted_keys[pos] == keys


@dataclass
class FiniteSpGroup:
    """Sp(2n, Z/N) as the sorted keys of its elements."""

    n: int
    N: int
    keys: np.ndarray
    generators: list = field(default_factory=list)

    def __len__(self):
        return len(self.keys)

    def elements(self) -> np.ndarray:
        return decode(self.keys, self.N, 2 * self.n)

    def contains(self, g) -> bool:
        return bool(_contains(self.keys, encode(np.asarray(g)[None], self.N))[0])


def _symplectic_mod(mats, n: int, N: int) -> np.ndarray:
    J = _sp_J(n)
    lhs = np.einsum("kji,jl,klm->kim", mats, J, mats) % N
    return np.all((lhs - J) % N == 0, axis=(1, 2))


def build_finite_sp(n: int, N: int, cap: int = DEFAULT_CAP, seed: int = 0,
                    override: bool = False) -> FiniteSpGroup:
    """Sp(2n, Z/N) by closure from the images of integral generators.

    Every element is checked to be symplectic mod N and closure under
    products is spot-checked on 1000 random pairs.
    """
    if not override and (n > 2 or N > 8):
        raise ValueError("desk scale is n <= 2, N <= 8; pass override=True")
    gens = sp_generators_mod(n)
    if N == 1:
        keys = np.zeros(1, dtype=np.int64)
        return FiniteSpGroup(n, N, keys, [name for name, _ in gens])
    keys = closure([g for _, g in gens], N, cap)
    group = FiniteSpGroup(n, N, keys, [name for name, _ in gens])
    mats = group.elements()
    if not np.all(_symplectic_mod(mats, n, N)):
        raise AssertionError("closure produced a non-symplectic residue")
    rng = np.random.default_rng(seed)
    i, j = rng.integers(len(mats), size=(2, 1000))
    prods = np.einsum("kij,kjl->kil", mats[i], mats[j]) % N
    if not np.all(_contains(keys, encode(prods, N))):
        raise AssertionError("closure is not closed under products")
    return group


def exhaustive_sl2(N: int) -> np.ndarray:
    """Sorted keys of SL(2, Z/N) by filtering all N^4 matrices."""
    grid = np.stack(np.meshgrid(*[np.arange(N)] * 4, indexing="ij"), -1).reshape(-1, 4)
    ok = (grid[:, 0] * grid[:, 3] - grid[:, 1] * grid[:, 2] - 1) % N == 0
    return np.sort(encode(grid[ok].reshape(-1, 2, 2), N))


def _subset_mask(mats, n: int, m: int) -> np.ndarray:
    I = np.eye(n, dtype=np.int64)
    A, B = mats[:, :n, :n], mats[:, :n, n:]
    C, D = mats[:, n:, :n], mats[:, n:, n:]
    return (np.all((A - I) % 2 == 0, axis=(1, 2)) & np.all((D - I) % 2 == 0, axis=(1, 2))
            & np.all(B % (2 * m) == 0, axis=(1, 2)) & np.all(C % (2 * m) == 0, axis=(1, 2)))


def congruence_subset(n: int, m: int, group: FiniteSpGroup | None = None,
                      cap: int = DEFAULT_CAP) -> np.ndarray:
    """Sorted keys of the elements of Sp(2n, Z/4m) with A, D == I (mod 2)
    and B, C == 0 (mod 2m)."""
    group = group or build_finite_sp(n, 4 * m, cap, override=True)
    mats = group.elements()
    return group.keys[_subset_mask(mats, n, m)]


def _diagonal_sl2(n: int, i: int, a, b, c, d) -> np.ndarray:
    g = np.eye(2 * n, dtype=np.int64)
    g[i, i], g[i, n + i], g[n + i, i], g[n + i, n + i] = a, b, c, d
    return g


def gamma2m_generators(n: int, m: int) -> list[np.ndarray]:
    """Shears by 2m S, lower shears by 2m S, embedded level-2 GL(n, Z) and
    [[1 + 2m, 2m], [-2m, 1 - 2m]] placed on each coordinate plane.

    Without the last family the diagonal blocks would only reach +-1
    modulo 4m.
    """
    gens = []
    for _, S in _elementary_symmetric(n):
        gens += [_translation(2 * m * S), _lower(2 * m * S)]
    gens += [_diagonal_sl2(n, i, 1 + 2 * m, 2 * m, -2 * m, 1 - 2 * m) for i in range(n)]
    return gens + [_embed(U) for U in linear_level2_generators(n)]


def subset_consistency(n: int, m: int, subset: np.ndarray, cap: int = DEFAULT_CAP) -> bool:
    """The subset equals the closure of integral Gamma_2m(2) generators mod 4m."""
    gens = gamma2m_generators(n, m)
    return np.array_equal(closure(gens, 4 * m, cap), subset)


def linear_level2_generators(n: int) -> list[np.ndarray]:
    """Sign changes and I + 2 E_ij: candidates generating {U == I (mod 2)}."""
    gens = []
    for i in range(n):
        U = np.eye(n, dtype=np.int64)
        U[i, i] = -1
        gens.append(U)
        for j in range(n):
            if i != j:
                U = np.eye(n, dtype=np.int64)
                U[i, j] = 2
                gens.append(U)
    return gens


def linear_level2_image(n: int, m: int, validate: bool = True) -> np.ndarray:
    """Sorted keys of embed_gl(U) mod 4m for U in GL(n, Z), U == I (mod 2).

    With ``validate`` (n <= 2) every such U with entries bounded by 12m is
    enumerated and its image must lie in the closure; otherwise
    GeneratorUncertainty is raised.
    """
    N = 4 * m
    keys = closure([_embed(U) for U in linear_level2_generators(n)], N)
    if validate and n <= 2:
        bound = 3 * N
        r = np.arange(-bound, bound + 1)
        if n == 1:
            cands = np.array([[[1]], [[-1]]], dtype=np.int64)
        else:
            grid = np.stack(np.meshgrid(r, r, r, r, indexing="ij"), -1).reshape(-1, 4)
            det = grid[:, 0] * grid[:, 3] - grid[:, 1] * grid[:, 2]
            ok = (np.abs(det) == 1) & np.all((grid - [1, 0, 0, 1]) % 2 == 0, axis=1)
            cands = grid[ok].reshape(-1, 2, 2)
        k = len(cands)
        emb = np.zeros((k, 2 * n, 2 * n), dtype=np.int64)
        emb[:, :n, :n] = cands
        emb[:, n:, n:] = np.transpose(np.linalg.inv(cands).round().astype(np.int64), (0, 2, 1))
        if not np.all(_contains(keys, encode(emb, N))):
            raise GeneratorUncertainty("level-2 linear generators miss a bounded element")
    return keys


@dataclass
class DoubleCosetTable:
    n: int
    m: int
    representatives: list
    cardinality: int
    orbit_sizes: list
    subset_size: int
    linear_image_size: int

    def to_json(self) -> dict:
        return {
            "n": self.n, "m": self.m, "cardinality": self.cardinality,
            "representatives": self.representatives,
            "orbit_sizes": self.orbit_sizes,
            "subset_size": self.subset_size,
            "linear_image_size": self.linear_image_size,
        }


def _right_products(mats, H, N) -> np.ndarray:
    return np.einsum("kij,hjl->khil", mats, H) % N


def orbits_union_find(subset_keys, gen_mats, N: int) -> np.ndarray:
    """Orbit label (root index) of each element under right multiplication
    by the group generated by ``gen_mats``."""
    d = gen_mats.shape[1]
    mats = decode(subset_keys, N, d)
    parent = np.arange(len(subset_keys))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    prods = _right_products(mats, gen_mats, N)
    for h in range(len(gen_mats)):
        partner = np.searchsorted(subset_keys, encode(prods[:, h], N))
        for a, b in zip(range(len(mats)), partner):
            ra, rb = find(a), find(int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return np.array([find(i) for i in range(len(mats))])


def orbits_bfs(subset_keys, group_mats, N: int) -> np.ndarray:
    """Orbit label (least index) of each element, by applying the whole group."""
    d = group_mats.shape[1]
    label = np.full(len(subset_keys), -1)
    for i in range(len(subset_keys)):
        if label[i] >= 0:
            continue
        x = decode(subset_keys[i:i + 1], N, d)
        orbit = encode(_right_products(x, group_mats, N)[0], N)
        label[np.searchsorted(subset_keys, orbit)] = i
    return label


def _cache_path(cache_dir, n, m) -> Path:
    return Path(cache_dir) / f"h1_n{n}_m{m}_v{CODE_VERSION}.jsonl"


def save_table(table: DoubleCosetTable, path) -> None:
    """One header line, then one representative per line, in sorted order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    head = {k: v for k, v in table.to_json().items() if k != "representatives"}
    head["version"] = CODE_VERSION
    lines = [json.dumps(head, sort_keys=True)]
    lines += [json.dumps({"rep": r}) for r in table.representatives]
    path.write_text("\n".join(lines) + "\n")


def load_table(path) -> DoubleCosetTable:
    lines = Path(path).read_text().splitlines()
    head = json.loads(lines[0])
    reps = [json.loads(line)["rep"] for line in lines[1:]]
    return DoubleCosetTable(head["n"], head["m"], reps, head["cardinality"],
                            head["orbit_sizes"], head["subset_size"], head["linear_image_size"])


def h1_double_cosets(n: int, m: int, cap: int = DEFAULT_CAP, cache_dir=None,
                     validate: bool = True) -> DoubleCosetTable:
    """Gamma(4m) \\ Gamma_2m(2) / Gamma_l(2), computed modulo 4m.

    Gamma(4m) is the kernel of reduction, so the table is the set of orbits
    of the congruence subset under right multiplication by the image of the
    level-2 linear group.  The orbits are computed twice (union-find over
    generators and direct application of the whole image) and must agree.
    """
    if cache_dir is not None and _cache_path(cache_dir, n, m).exists():
        return load_table(_cache_path(cache_dir, n, m))
    N = 4 * m
    subset = congruence_subset(n, m, cap=cap)
    if validate and not subset_consistency(n, m, subset, cap):
        raise GeneratorUncertainty("congruence subset differs from the generated image")
    H_keys = linear_level2_image(n, m, validate=validate)
    H = decode(H_keys, N, 2 * n)
    if not np.all(_contains(subset, H_keys)):
        raise AssertionError("linear image is not inside the subset")
    gens = np.array([_embed(U) % N for U in linear_level2_generators(n)])
    uf = orbits_union_find(subset, gens, N)
    bfs = orbits_bfs(subset, H, N)
    if not np.array_equal(uf, bfs):
        raise AssertionError("orbit algorithms disagree")
    roots, sizes = np.unique(bfs, return_counts=True)
    reps = decode(subset[roots], N, 2 * n)
    table = DoubleCosetTable(
        n=n, m=m,
        representatives=[r.tolist() for r in reps],
        cardinality=len(roots),
        orbit_sizes=sizes.tolist(),
        subset_size=len(subset),
        linear_image_size=len(H_keys),
    )
    if cache_dir is not None:
        save_table(table, _cache_path(cache_dir, n, m))
    return table


def classify(table: DoubleCosetTable, g) -> int:
    """Index of the representative whose orbit contains g (mod 4m)."""
    N = 4 * table.m
    n = table.n
    H = decode(linear_level2_image(n, table.m, validate=False), N, 2 * n)
    orbit = set(encode(_right_products(np.asarray(g, dtype=np.int64)[None] % N, H, N)[0], N).tolist())
    for i, r in enumerate(table.representatives):
        if int(encode(np.array([r]), N)[0]) in orbit:
            return i
    raise ValueError("element is not in the congruence subset")


def sl2_real_components() -> int:
    """|Gamma(2) \\ SL(2, Z) / S'| with S' = {+-I, +-v}, computed mod 2."""
    sl2 = decode(exhaustive_sl2(2), 2, 2)
    v = np.array([[0, -1], [1, 0]])
    S = np.array([np.eye(2, dtype=np.int64), -np.eye(2, dtype=np.int64), v, -v]) % 2
    orbits = {tuple(sorted(encode(_right_products(g[None], S, 2)[0], 2).tolist())) for g in sl2}
    return len(orbits)


OMEGA = complex(-0.5, np.sqrt(3) / 2)


def omega_stabilizer() -> list[np.ndarray]:
    s = np.array([[0, -1], [1, 1]], dtype=np.int64)
    t = np.array([[-1, -1], [1, 0]], dtype=np.int64)
    return [sign * g for g in (np.eye(2, dtype=np.int64), s, t) for sign in (1, -1)]


def omega_not_real_check() -> bool:
    """No j s (s in the stabilizer of omega) is == I (mod 2), j = [[0, -1], [1, 0]]."""
    j = np.array([[0, -1], [1, 0]], dtype=np.int64)
    return all(np.any((j @ s - np.eye(2, dtype=np.int64)) % 2) for s in omega_stabilizer())
