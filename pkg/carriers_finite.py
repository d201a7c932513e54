"""
Finite Carriers Module for gqm
Subgroup lattices of finite abelian groups and subspace lattices over prime fields
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np
from sympy import isprime

from core import (DEFAULT_ELEMENT_BUDGET, DEFAULT_SAMPLE_BUDGET, DIM, LOG, BudgetError,
                  CarrierMismatchError, ExtDist, GqmCarrier, ValidationError)
from linalg import (gf_contains, gf_image, gf_meet, gf_preimage, gf_rref, hermite_form,
                    lattice_contains, lattice_generators, lattice_image, lattice_meet,
                    lattice_order, lattice_preimage)

MAX_MODULUS = 2 ** 20


def _freeze(matrix):
    return tuple(tuple(int(v) for v in row) for row in np.asarray(matrix, dtype=np.int64))


# -- finite abelian groups ---------------------------------------------------

@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z/m_1 x ... x Z/m_n"""
    moduli: tuple

    def __post_init__(self):
        moduli = tuple(int(m) for m in self.moduli)
        if not moduli:
            raise ValidationError("a finite abelian group needs at least one modulus")
        for m in moduli:
            if m < 2 or m > MAX_MODULUS:
                raise ValidationError(f"modulus {m} outside [2, {MAX_MODULUS}]")
        object.__setattr__(self, 'moduli', moduli)

    @property
    def rank(self):
        return len(self.moduli)

    @property
    def order(self):
        return math.prod(self.moduli)

    def elements(self):
        return itertools.product(*(range(m) for m in self.moduli))


@dataclass(frozen=True)
class SubgroupRep:
    """Subgroup held as its column Hermite matrix relative to the moduli"""
    moduli: tuple
    matrix: tuple
    order: int

    def hermite(self):
        return np.array(self.matrix, dtype=np.int64).reshape(len(self.moduli), len(self.moduli))

    def generators(self):
        """n x k matrix of generating columns"""
        return lattice_generators(self.hermite(), self.moduli)

    def contains(self, vector):
        return lattice_contains(self.hermite(), vector, self.moduli)


def _subgroup_from_hermite(moduli, W):
    return SubgroupRep(tuple(moduli), _freeze(W), lattice_order(W, moduli))


def _check_group(G, *subgroups):
    for H in subgroups:
        if H.moduli != G.moduli:
            raise CarrierMismatchError(f"subgroup of {H.moduli} handed to group {G.moduli}")


def subgroup_canonicalize(G, generators):
    """
    Canonical subgroup generated by a list of vectors

    Args:
        G: FiniteAbelianGroup
        generators: iterable of vectors with one coordinate per modulus

    Returns:
        SubgroupRep; an empty list gives the trivial subgroup
    """
    vectors = [tuple(int(v) for v in g) for g in generators]
    for v in vectors:
        if len(v) != G.rank:
            raise ValidationError(f"generator {v} has {len(v)} coordinates, group has {G.rank}")
    columns = np.array(vectors, dtype=np.int64).T if vectors else np.zeros((G.rank, 0), dtype=np.int64)
    return _subgroup_from_hermite(G.moduli, hermite_form(columns, G.moduli))


def trivial_subgroup(G):
    return subgroup_canonicalize(G, [])


def whole_group(G):
    return _subgroup_from_hermite(G.moduli, hermite_form(np.eye(G.rank, dtype=np.int64), G.moduli))


def subgroup_join(G, H, K):
    _check_group(G, H, K)
    return _subgroup_from_hermite(G.moduli, hermite_form(np.hstack([H.generators(), K.generators()]), G.moduli))


def subgroup_meet(G, H, K):
    _check_group(G, H, K)
    return _subgroup_from_hermite(G.moduli, lattice_meet(H.hermite(), K.hermite(), G.moduli))


def dist_vee(G, H, K):
    """log [H + K : H]"""
    return ExtDist.log(subgroup_join(G, H, K).order // H.order)


def dist_wedge(G, H, K):
    """log [H : H meet K]"""
    return ExtDist.log(H.order // subgroup_meet(G, H, K).order)


@dataclass(frozen=True)
class AbEndo:
    """Endomorphism x -> A x mod moduli of a finite abelian group"""
    group: FiniteAbelianGroup
    matrix: tuple

    def __post_init__(self):
        n = self.group.rank
        A = np.asarray(self.matrix, dtype=np.int64)
        if A.shape != (n, n):
            raise ValidationError(f"endomorphism matrix must be {n}x{n}, got {A.shape}")
        mods = np.array(self.group.moduli, dtype=np.int64)
        A = A % mods[:, None]
        # column j times m_j must vanish mod every target modulus
        bad = np.argwhere((A * mods[None, :]) % mods[:, None])
        if bad.size:
            i, j = (int(v) for v in bad[0])
            raise ValidationError(f"entry ({i}, {j}) breaks well-definedness: "
                                  f"{int(A[i, j])} * {int(mods[j])} is not 0 mod {int(mods[i])}",
                                  witness=(i, j))
        object.__setattr__(self, 'matrix', _freeze(A))

    @classmethod
    def identity(cls, G):
        return cls(G, _freeze(np.eye(G.rank, dtype=np.int64)))

    def array(self):
        return np.array(self.matrix, dtype=np.int64)

    def apply(self, vector):
        mods = np.array(self.group.moduli, dtype=np.int64)
        return tuple(int(v) for v in (self.array() @ np.asarray(vector, dtype=np.int64)) % mods)

    def compose(self, other):
        """self after other"""
        mods = np.array(self.group.moduli, dtype=np.int64)
        return AbEndo(self.group, _freeze((self.array() @ other.array()) % mods[:, None]))

    def power(self, k):
        out = AbEndo.identity(self.group)
        for _ in range(k):
            out = self.compose(out)
        return out


def endo_image(f, H):
    _check_group(f.group, H)
    W = lattice_image(f.array(), H.hermite(), f.group.moduli, f.group.moduli)
    return _subgroup_from_hermite(f.group.moduli, W)


def endo_preimage(f, H):
    _check_group(f.group, H)
    W = lattice_preimage(f.array(), H.hermite(), f.group.moduli, f.group.moduli)
    return _subgroup_from_hermite(f.group.moduli, W)


def enumerate_subgroups(G, budget=DEFAULT_ELEMENT_BUDGET):
    """
    Complete subgroup lattice of G, ordered by (order, Hermite matrix)

    Every subgroup is a join of cyclic subgroups, so joins of cyclic subgroups are
    closed off until nothing new appears.
    """
    if G.order > budget:
        raise BudgetError(f"|G| = {G.order} exceeds the element budget {budget}")
    cyclic = list(dict.fromkeys(subgroup_canonicalize(G, [g]) for g in G.elements()))
    found = dict.fromkeys(cyclic)
    frontier = list(cyclic)
    while frontier:
        following = []
        for a in frontier:
            for c in cyclic:
                j = subgroup_join(G, a, c)
                if j not in found:
                    found[j] = None
                    following.append(j)
        frontier = following
    return sorted(found, key=lambda H: (H.order, H.matrix))


def enumerate_endomorphisms(G, budget=DEFAULT_ELEMENT_BUDGET):
    """All endomorphisms of G as AbEndo, when their count fits the budget"""
    mods = G.moduli
    columns = []
    for mj in mods:
        columns.append([g for g in G.elements() if all((mj * gi) % mi == 0 for gi, mi in zip(g, mods))])
    total = math.prod(len(c) for c in columns)
    if total > budget:
        raise BudgetError(f"{total} endomorphisms exceed the budget {budget}")
    return [AbEndo(G, _freeze(np.array(choice, dtype=np.int64).T)) for choice in itertools.product(*columns)]


# -- vector spaces over GF(p) ------------------------------------------------

@dataclass(frozen=True)
class VectorSpace:
    """GF(p)^n"""
    p: int
    n: int

    def __post_init__(self):
        if not isprime(int(self.p)) or self.p > MAX_MODULUS:
            raise ValidationError(f"field size {self.p} is not a prime below {MAX_MODULUS}")
        if self.n < 1:
            raise ValidationError("vector space dimension must be positive")

    def vectors(self):
        return itertools.product(range(self.p), repeat=self.n)


@dataclass(frozen=True)
class SubspaceRep:
    """Subspace held as its reduced row-echelon basis"""
    p: int
    n: int
    basis: tuple

    @property
    def dim(self):
        return len(self.basis)

    def rows(self):
        return np.array(self.basis, dtype=np.int64).reshape(self.dim, self.n)

    def contains(self, vector):
        return gf_contains(self.rows(), vector, self.p)


def _check_space(V, *subspaces):
    for H in subspaces:
        if (H.p, H.n) != (V.p, V.n):
            raise CarrierMismatchError(f"subspace of GF({H.p})^{H.n} handed to GF({V.p})^{V.n}")


def _subspace(V, rows):
    return SubspaceRep(V.p, V.n, _freeze(gf_rref(rows, V.p, V.n)))


def subspace_canonicalize(V, vectors):
    vectors = [tuple(int(v) for v in g) for g in vectors]
    for v in vectors:
        if len(v) != V.n:
            raise ValidationError(f"vector {v} has {len(v)} coordinates, space has {V.n}")
    return _subspace(V, np.array(vectors, dtype=np.int64).reshape(len(vectors), V.n))


def zero_subspace(V):
    return SubspaceRep(V.p, V.n, ())


def full_space(V):
    return _subspace(V, np.eye(V.n, dtype=np.int64))


def subspace_join(V, H, K):
    _check_space(V, H, K)
    return _subspace(V, np.vstack([H.rows(), K.rows()]))


def subspace_meet(V, H, K):
    _check_space(V, H, K)
    return _subspace(V, gf_meet(H.rows(), K.rows(), V.p, V.n))


def dist_vee_dim(V, H, K):
    return ExtDist.dim(subspace_join(V, H, K).dim - H.dim)


def dist_wedge_dim(V, H, K):
    return ExtDist.dim(H.dim - subspace_meet(V, H, K).dim)


@dataclass(frozen=True)
class LinMap:
    """Linear endomorphism x -> A x of GF(p)^n"""
    space: VectorSpace
    matrix: tuple

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.int64)
        n = self.space.n
        if A.shape != (n, n):
            raise ValidationError(f"linear map matrix must be {n}x{n}, got {A.shape}")
        object.__setattr__(self, 'matrix', _freeze(A % self.space.p))

    @classmethod
    def identity(cls, V):
        return cls(V, _freeze(np.eye(V.n, dtype=np.int64)))

    def array(self):
        return np.array(self.matrix, dtype=np.int64)

    def apply(self, vector):
        return tuple(int(v) for v in (self.array() @ np.asarray(vector, dtype=np.int64)) % self.space.p)

    def compose(self, other):
        return LinMap(self.space, _freeze((self.array() @ other.array()) % self.space.p))

    def power(self, k):
        out = LinMap.identity(self.space)
        for _ in range(k):
            out = self.compose(out)
        return out


def linmap_image(f, H):
    _check_space(f.space, H)
    return SubspaceRep(H.p, H.n, _freeze(gf_image(f.array(), H.rows(), H.p, H.n)))


def linmap_preimage(f, H):
    _check_space(f.space, H)
    return _subspace(f.space, gf_preimage(f.array(), H.rows(), H.p, H.n))


def enumerate_subspaces(V, budget=DEFAULT_ELEMENT_BUDGET):
    """Complete subspace lattice of V, ordered by (dimension, basis)"""
    if V.p ** V.n > budget:
        raise BudgetError(f"|V| = {V.p ** V.n} exceeds the element budget {budget}")
    lines = list(dict.fromkeys(subspace_canonicalize(V, [v]) for v in V.vectors()))
    found = dict.fromkeys(lines)
    frontier = list(lines)
    while frontier:
        following = []
        for a in frontier:
            for line in lines:
                j = subspace_join(V, a, line)
                if j not in found:
                    found[j] = None
                    following.append(j)
        frontier = following
    return sorted(found, key=lambda H: (H.dim, H.basis))


def enumerate_linmaps(V, budget=DEFAULT_ELEMENT_BUDGET):
    total = V.p ** (V.n * V.n)
    if total > budget:
        raise BudgetError(f"{total} linear maps exceed the budget {budget}")
    return [LinMap(V, _freeze(np.array(entries, dtype=np.int64).reshape(V.n, V.n)))
            for entries in itertools.product(range(V.p), repeat=V.n * V.n)]


# -- carriers ----------------------------------------------------------------

def _random_vectors(rng, moduli, budget):
    count = int(rng.integers(0, budget + 1))
    return rng.integers(0, np.asarray(moduli, dtype=np.int64), size=(count, len(moduli))).tolist()


class SubgroupJoinCarrier(GqmCarrier):
    """
    S-vee of a finite abelian group: join = sum, d(H, K) = log [H + K : H]

    An optional invariant maps the integer index to an ExtDist; the default is
    the log-index. The carrier unit follows the invariant.
    """
    unit = LOG

    def __init__(self, group, sample_budget=DEFAULT_SAMPLE_BUDGET, invariant=None):
        super().__init__()
        self.group = group
        self.sample_budget = sample_budget
        self.invariant = invariant or ExtDist.log
        self.unit = self.invariant(1).unit
        if not self.invariant(1).is_zero:
            raise ValidationError("invariant must send index 1 to a zero distance")
        self.name = f"subgroup_vee{list(group.moduli)}"
        self._bottom = trivial_subgroup(group)

    @property
    def bottom(self):
        return self._bottom

    def _join(self, x, y):
        return subgroup_join(self.group, x, y)

    def _dist(self, x, y):
        return self.invariant(self.join(x, y).order // x.order)

    def _canonical(self, x):
        return _subgroup_from_hermite(self.group.moduli, hermite_form(x.generators(), self.group.moduli))

    def sample(self, rng):
        return subgroup_canonicalize(self.group, _random_vectors(rng, self.group.moduli, self.sample_budget))

    def owns(self, x):
        return isinstance(x, SubgroupRep) and x.moduli == self.group.moduli

    def elements(self, budget=DEFAULT_ELEMENT_BUDGET):
        return enumerate_subgroups(self.group, budget)

    def to_json(self, x):
        return {'order': x.order, 'hermite': [list(r) for r in x.matrix]}


class SubgroupMeetCarrier(SubgroupJoinCarrier):
    """S-wedge of a finite abelian group: bottom = G, join = intersection, d*(H, K) = log [H : H meet K]"""

    def __init__(self, group, sample_budget=DEFAULT_SAMPLE_BUDGET, invariant=None):
        super().__init__(group, sample_budget, invariant)
        self.name = f"subgroup_wedge{list(group.moduli)}"
        self._bottom = whole_group(group)

    def _join(self, x, y):
        return subgroup_meet(self.group, x, y)

    def _dist(self, x, y):
        return self.invariant(x.order // self.join(x, y).order)


class SubspaceJoinCarrier(GqmCarrier):
    """Subspaces of GF(p)^n under sum with d(H, K) = dim((H + K)/H)"""
    unit = DIM

    def __init__(self, space, sample_budget=DEFAULT_SAMPLE_BUDGET):
        super().__init__()
        self.space = space
        self.sample_budget = sample_budget
        self.name = f"subspace_vee(GF({space.p})^{space.n})"
        self._bottom = zero_subspace(space)

    @property
    def bottom(self):
        return self._bottom

    def _join(self, x, y):
        return subspace_join(self.space, x, y)

    def _dist(self, x, y):
        return ExtDist.dim(self.join(x, y).dim - x.dim)

    def _canonical(self, x):
        return _subspace(self.space, x.rows())

    def sample(self, rng):
        moduli = (self.space.p,) * self.space.n
        return subspace_canonicalize(self.space, _random_vectors(rng, moduli, self.sample_budget))

    def owns(self, x):
        return isinstance(x, SubspaceRep) and (x.p, x.n) == (self.space.p, self.space.n)

    def elements(self, budget=DEFAULT_ELEMENT_BUDGET):
        return enumerate_subspaces(self.space, budget)

    def to_json(self, x):
        return {'dim': x.dim, 'basis': [list(r) for r in x.basis]}


class SubspaceMeetCarrier(SubspaceJoinCarrier):
    """Subspaces under intersection: bottom = V, d*(H, K) = dim H - dim(H meet K)"""

    def __init__(self, space, sample_budget=DEFAULT_SAMPLE_BUDGET):
        super().__init__(space, sample_budget)
        self.name = f"subspace_wedge(GF({space.p})^{space.n})"
        self._bottom = full_space(space)

    def _join(self, x, y):
        return subspace_meet(self.space, x, y)

    def _dist(self, x, y):
        return ExtDist.dim(x.dim - self.join(x, y).dim)
