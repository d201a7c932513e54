"""
Exact Linear Algebra Module for gqm
Modular Hermite forms for subgroups of Z/m1 x ... x Z/mn and row reduction over GF(p)

Subgroups are lattices L = span(generators) + diag(moduli) in Z^n. Their canonical
form is the upper-triangular column Hermite matrix W with W[i, i] dividing m_i and
0 <= W[r, j] < W[r, r] for j > r.
"""
import math
from functools import lru_cache

import numpy as np
from sympy import Matrix

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # sympy < 1.13
    from sympy.core.numbers import igcdex

# reductions are keyed on the raw int64 bytes of their (already reduced) input
REDUCTION_CACHE_SIZE = 1 << 16


def _as_columns(generators, rows):
    work = np.asarray(generators, dtype=np.int64)
    if work.size == 0:
        return np.zeros((rows, 0), dtype=np.int64)
    return work.reshape(rows, -1)


def _eliminate_row(work, i, mods):
    """Clear row i of work; returns the pivot column and the remaining columns"""
    n = mods.size
    m = int(mods[i])
    row = work[i]
    hits = np.flatnonzero(row)
    entries = row[hits]
    gcds = np.gcd(entries, m)
    g = int(np.gcd.reduce(gcds))
    best = np.flatnonzero(gcds == g)
    if best.size:
        # one column already reaches the row gcd: unimodular swap with m*e_i, then
        # subtract multiples of the pivot from every other column
        c = int(hits[best[0]])
        column = work[:, c].copy()
        unit = int(column[i]) // g
        scale = pow(unit, -1, m // g) if m // g > 1 else 1
        pivot = (scale * column) % mods
        pivot[i] = g
        others = np.delete(work, c, axis=1)
        factors = others[i] // g
        others = (others - np.outer(pivot, factors)) % mods[:, None]
        others[i] = 0
        extra = ((-(m // g)) * column) % mods
        return pivot, np.column_stack([others, extra])
    pivot = np.zeros(n, dtype=np.int64)
    pivot[i] = m
    rest = []
    for j in range(work.shape[1]):
        col = work[:, j]
        b = int(col[i])
        if b == 0:
            rest.append(col)
            continue
        a = int(pivot[i])
        s, t, g = igcdex(a, b)
        s, t, g = int(s), int(t), int(g)
        combined = (s * pivot + t * col) % mods
        combined[i] = g
        other = ((-(b // g)) * pivot + (a // g) * col) % mods
        other[i] = 0
        pivot = combined
        rest.append(other)
    if rest:
        return pivot, np.column_stack(rest)
    return pivot, np.zeros((n, 0), dtype=np.int64)


def _reduce_above(W, mods):
    n = W.shape[0]
    for i in range(n - 2, -1, -1):
        q = W[i, i + 1:] // W[i, i]
        if q.any():
            W[:i + 1, i + 1:] -= np.outer(W[:i + 1, i], q)
            W[:i, i + 1:] %= mods[:i, None]
    return W


def hermite_form(generators, moduli):
    """
    Canonical column Hermite matrix of the subgroup generated by the columns

    Args:
        generators: n x k integer matrix (columns are generators); may have k = 0
        moduli: the n cyclic orders

    Returns:
        n x n int64 upper-triangular matrix
    """
    mods = np.asarray(moduli, dtype=np.int64).reshape(-1)
    work = _as_columns(generators, mods.size) % mods[:, None]
    key = (work.tobytes(), work.shape, tuple(int(m) for m in mods))
    return _hermite_cached(*key).copy()


@lru_cache(maxsize=REDUCTION_CACHE_SIZE)
def _hermite_cached(data, shape, moduli):
    mods = np.array(moduli, dtype=np.int64)
    n = mods.size
    work = np.frombuffer(data, dtype=np.int64).reshape(shape).copy()
    W = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        work = work[:, work.any(axis=0)]
        if not work[i].any():
            W[i, i] = mods[i]
            continue
        pivot, work = _eliminate_row(work, i, mods)
        W[:, i] = pivot
    return _reduce_above(W, mods)


def lattice_order(W, moduli):
    """Order of the subgroup with Hermite matrix W"""
    return math.prod(int(m) // int(W[i, i]) for i, m in enumerate(moduli))


def lattice_generators(W, moduli):
    """Nonzero columns of W reduced mod the moduli (the subgroup's generators)"""
    mods = np.asarray(moduli, dtype=np.int64)
    cols = W % mods[:, None]
    return cols[:, cols.any(axis=0)]


def lattice_contains(W, vector, moduli):
    mods = np.asarray(moduli, dtype=np.int64)
    v = np.asarray(vector, dtype=np.int64) % mods
    for i in range(mods.size - 1, -1, -1):
        d = int(W[i, i])
        if v[i] % d:
            return False
        q = int(v[i]) // d
        if q:
            v = (v - q * W[:, i]) % mods
    return True


def lattice_meet(W1, W2, moduli):
    """Intersection of two subgroups, by Hermite reduction of (W1; W1) | (0; W2)"""
    mods = np.asarray(moduli, dtype=np.int64)
    n = mods.size
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    stacked = np.block([[W1, np.zeros_like(W2)], [W1, W2]])
    H = hermite_form(stacked, np.concatenate([mods, mods]))
    return hermite_form(H[:n, :n], mods)


def lattice_preimage(matrix, W, domain_moduli, target_moduli):
    """
    Preimage {x : A x in L_W} of a target subgroup under a well-defined matrix map

    Columns (e_j; A e_j) and (0; W) are reduced over the stacked moduli; columns whose
    bottom block vanishes span the preimage.
    """
    dom = np.asarray(domain_moduli, dtype=np.int64)
    tgt = np.asarray(target_moduli, dtype=np.int64)
    n, t = dom.size, tgt.size
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if t == 0:
        return hermite_form(np.eye(n, dtype=np.int64), dom)
    A = np.asarray(matrix, dtype=np.int64).reshape(t, n) % tgt[:, None]
    stacked = np.block([[np.eye(n, dtype=np.int64), np.zeros((n, t), dtype=np.int64)],
                        [A, np.asarray(W, dtype=np.int64).reshape(t, t)]])
    H = hermite_form(stacked, np.concatenate([dom, tgt]))
    return hermite_form(H[:n, :n], dom)


def lattice_image(matrix, W, domain_moduli, target_moduli):
    gens = lattice_generators(W, domain_moduli)
    tgt = np.asarray(target_moduli, dtype=np.int64)
    A = np.asarray(matrix, dtype=np.int64).reshape(tgt.size, -1)
    return hermite_form((A @ gens) % tgt[:, None], tgt)


# -- prime fields ------------------------------------------------------------

def _rows(values, ncols):
    values = np.asarray(values, dtype=np.int64)
    if ncols == 0 or values.size == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    return values.reshape(-1, ncols)


def gf_rref(rows, p, ncols):
    """Reduced row-echelon basis (zero rows dropped) of the row space over GF(p)"""
    rows = _rows(rows, ncols) % p
    rows = rows[rows.any(axis=1)]
    if rows.shape[0] == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    return _rref_cached(rows.tobytes(), rows.shape, int(p)).copy()


@lru_cache(maxsize=REDUCTION_CACHE_SIZE)
def _rref_cached(data, shape, p):
    R = np.frombuffer(data, dtype=np.int64).reshape(shape).copy()
    rank = 0
    for c in range(shape[1]):
        if rank == shape[0]:
            break
        hits = np.flatnonzero(R[rank:, c])
        if hits.size == 0:
            continue
        k = rank + int(hits[0])
        if k != rank:
            R[[rank, k]] = R[[k, rank]]
        R[rank] = (R[rank] * pow(int(R[rank, c]), -1, p)) % p
        factors = R[:, c].copy()
        factors[rank] = 0
        R = (R - np.outer(factors, R[rank])) % p
        rank += 1
    return R[:rank]


def gf_nullspace(matrix, p, ncols):
    """Row basis of {x : matrix @ x = 0} over GF(p)"""
    R = gf_rref(matrix, p, ncols)
    pivots = [int(np.flatnonzero(r)[0]) for r in R]
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for b, f in enumerate(free):
        basis[b, f] = 1
        for r, pc in enumerate(pivots):
            basis[b, pc] = (-R[r, f]) % p
    return basis


def gf_meet(A, B, p, ncols):
    """Intersection of two row spaces (Zassenhaus)"""
    A = _rows(A, ncols)
    B = _rows(B, ncols)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    stacked = np.vstack([np.hstack([A, A]), np.hstack([B, np.zeros_like(B)])])
    R = gf_rref(stacked, p, 2 * ncols)
    tail = R[~R[:, :ncols].any(axis=1), ncols:]
    return gf_rref(tail, p, ncols)


def gf_image(matrix, rows, p, ncols_out):
    A = np.asarray(matrix, dtype=np.int64).reshape(ncols_out, -1)
    rows = _rows(rows, A.shape[1])
    return gf_rref((rows @ A.T) % p, p, ncols_out)


def gf_preimage(matrix, rows, p, ncols_in):
    """Preimage of a row space under x -> matrix @ x"""
    A = np.asarray(matrix, dtype=np.int64).reshape(-1, ncols_in)
    t = A.shape[0]
    annihilator = gf_nullspace(rows, p, t)
    if annihilator.shape[0] == 0:
        return np.eye(ncols_in, dtype=np.int64)
    return gf_nullspace((annihilator @ A) % p, p, ncols_in)


def gf_contains(rows, vector, p):
    n = np.asarray(vector).size
    rows = gf_rref(rows, p, n)
    extended = gf_rref(np.vstack([rows, np.asarray(vector, dtype=np.int64).reshape(1, n)]), p, n)
    return extended.shape[0] == rows.shape[0]


def inverse_mod(matrix, modulus):
    """Inverse of a square integer matrix mod modulus; raises ValueError if singular"""
    M = Matrix(np.asarray(matrix, dtype=np.int64).tolist())
    return np.array(M.inv_mod(modulus).tolist(), dtype=np.int64) % modulus
