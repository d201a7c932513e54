"""
Windowed Carriers Module for gqm
Finitely supported subgroups of the direct sum of Z/m, open subgroups of the product of Z/m,
banded endomorphisms acting on both, and the same machinery over GF(p)
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import isprime

from carriers_finite import (MAX_MODULUS, FiniteAbelianGroup, SubgroupRep, SubspaceRep, VectorSpace,
                             _freeze, enumerate_subgroups, enumerate_subspaces)
from core import (DEFAULT_ELEMENT_BUDGET, DEFAULT_SAMPLE_BUDGET, DIM, LOG, BudgetError,
                  CarrierMismatchError, ConfigError, ExtDist, GqmCarrier, ValidationError)
from linalg import (gf_contains, gf_meet, gf_preimage, gf_rref, hermite_form, lattice_contains,
                    lattice_generators, lattice_meet, lattice_order, lattice_preimage)

MAX_WINDOW = 256
MAX_PROBES = 64


class _GroupBlocks:
    """Subgroup bodies inside (Z/m)^w"""
    unit = LOG
    body_type = SubgroupRep

    def __init__(self, modulus):
        self.modulus = modulus

    def moduli(self, width):
        return (self.modulus,) * width

    def canonical(self, width, columns):
        W = hermite_form(columns, self.moduli(width))
        return SubgroupRep(self.moduli(width), _freeze(W), lattice_order(W, self.moduli(width)))

    def columns(self, body):
        return body.generators()

    def width(self, body):
        return len(body.moduli)

    def quotient(self, big, small):
        return ExtDist.log(big.order // small.order)

    def meet(self, a, b):
        mods = a.moduli
        W = lattice_meet(a.hermite(), b.hermite(), mods)
        return SubgroupRep(mods, _freeze(W), lattice_order(W, mods))

    def preimage(self, matrix, body, width):
        W = lattice_preimage(matrix, body.hermite(), self.moduli(width), body.moduli)
        return SubgroupRep(self.moduli(width), _freeze(W), lattice_order(W, self.moduli(width)))

    def contains(self, body, vector):
        return lattice_contains(body.hermite(), vector, body.moduli)

    def owns(self, body):
        return isinstance(body, SubgroupRep) and all(m == self.modulus for m in body.moduli)

    def to_json(self, body):
        return {'order': body.order, 'hermite': [list(r) for r in body.matrix]}


class _FieldBlocks:
    """Subspace bodies inside GF(p)^w"""
    unit = DIM
    body_type = SubspaceRep

    def __init__(self, p):
        self.modulus = p

    def canonical(self, width, columns):
        if width == 0:
            return SubspaceRep(self.modulus, 0, ())
        columns = np.asarray(columns, dtype=np.int64).reshape(width, -1)
        return SubspaceRep(self.modulus, width, _freeze(gf_rref(columns.T, self.modulus, width)))

    def columns(self, body):
        return body.rows().T

    def width(self, body):
        return body.n

    def quotient(self, big, small):
        return ExtDist.dim(big.dim - small.dim)

    def meet(self, a, b):
        return SubspaceRep(a.p, a.n, _freeze(gf_meet(a.rows(), b.rows(), a.p, a.n)))

    def preimage(self, matrix, body, width):
        rows = gf_rref(gf_preimage(matrix, body.rows(), self.modulus, width), self.modulus, width)
        return SubspaceRep(self.modulus, width, _freeze(rows))

    def contains(self, body, vector):
        return gf_contains(body.rows(), vector, self.modulus)

    def owns(self, body):
        return isinstance(body, SubspaceRep) and body.p == self.modulus

    def to_json(self, body):
        return {'dim': body.dim, 'basis': [list(r) for r in body.basis]}


@lru_cache(maxsize=None)
def _blocks(modulus, field):
    return _FieldBlocks(modulus) if field else _GroupBlocks(modulus)


def _check_modulus(modulus, field):
    if modulus < 2 or modulus > MAX_MODULUS:
        raise ValidationError(f"modulus {modulus} outside [2, {MAX_MODULUS}]")
    if field and not isprime(modulus):
        raise ValidationError(f"field mode needs a prime, got {modulus}")


def _is_field(body):
    return isinstance(body, SubspaceRep)


def _blocks_of(element):
    return _blocks(element.modulus, _is_field(element.body))


def _unit_columns(width, indices):
    cols = np.zeros((width, len(indices)), dtype=np.int64)
    for c, i in enumerate(indices):
        cols[i, c] = 1
    return cols


# -- direct sum --------------------------------------------------------------

@dataclass(frozen=True)
class WindowElement:
    """Finite subgroup of the direct sum supported on [offset, offset + width)"""
    modulus: int
    offset: int
    body: object

    @property
    def width(self):
        return _blocks_of(self).width(self.body)

    @property
    def stop(self):
        return self.offset + self.width


def window_bottom(modulus, field=False):
    return WindowElement(modulus, 0, _blocks(modulus, field).canonical(0, np.zeros((0, 0), dtype=np.int64)))


def _window(modulus, field, offset, columns):
    """Canonical element from a column matrix placed at offset; trims unused coordinates"""
    blocks = _blocks(modulus, field)
    cols = np.asarray(columns, dtype=np.int64)
    if cols.size == 0:
        return window_bottom(modulus, field)
    cols = cols % modulus
    cols = cols[:, cols.any(axis=0)]
    support = np.flatnonzero(cols.any(axis=1))
    if support.size == 0:
        return window_bottom(modulus, field)
    lo, hi = int(support[0]), int(support[-1]) + 1
    return WindowElement(modulus, offset + lo, blocks.canonical(hi - lo, cols[lo:hi]))


def window_element(modulus, offset, generators, field=False):
    """
    Element generated by vectors laid out from position offset

    Args:
        modulus: m (a prime p in field mode)
        offset: absolute index of the first coordinate of every vector
        generators: list of equal-length coordinate lists
    """
    vectors = [list(g) for g in generators]
    if not vectors:
        return window_bottom(modulus, field)
    width = len(vectors[0])
    if any(len(v) != width for v in vectors):
        raise ValidationError("window generators must share one length")
    return _window(modulus, field, offset, np.array(vectors, dtype=np.int64).T)


def unit_window(modulus, indices, field=False):
    """Span of the unit vectors e_i for the given absolute indices"""
    indices = sorted(set(indices))
    if not indices:
        return window_bottom(modulus, field)
    lo = indices[0]
    width = indices[-1] - lo + 1
    return _window(modulus, field, lo, _unit_columns(width, [i - lo for i in indices]))


def _embed(x, start, stop):
    cols = _blocks_of(x).columns(x.body)
    out = np.zeros((stop - start, cols.shape[1]), dtype=np.int64)
    out[x.offset - start:x.stop - start] = cols
    return out


def _check_window_pair(x, y):
    if x.modulus != y.modulus or _is_field(x.body) != _is_field(y.body):
        raise CarrierMismatchError(f"window elements over different carriers: {x.modulus} vs {y.modulus}")


def window_join(x, y):
    _check_window_pair(x, y)
    if x.width == 0:
        return y
    if y.width == 0:
        return x
    start, stop = min(x.offset, y.offset), max(x.stop, y.stop)
    cols = np.hstack([_embed(x, start, stop), _embed(y, start, stop)])
    return _window(x.modulus, _is_field(x.body), start, cols)


def window_dist(x, y):
    """log [x + y : x] (Dim in field mode)"""
    return _blocks_of(x).quotient(window_join(x, y).body, x.body)


@dataclass(frozen=True)
class BandedEndo:
    """
    Convolution endomorphism e_i -> sum_t coeffs[t] e_(i + start + t)

    Coefficients are reduced mod the modulus and trimmed so that the first and
    last are nonzero; the zero map has an empty band.
    """
    modulus: int
    coeffs: tuple
    start: int = 0

    def __post_init__(self):
        coeffs = [int(c) % self.modulus for c in self.coeffs]
        start = int(self.start)
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            start += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            start = 0
        object.__setattr__(self, 'coeffs', tuple(coeffs))
        object.__setattr__(self, 'start', start)

    @classmethod
    def shift(cls, modulus, step=1):
        return cls(modulus, (1,), step)

    @classmethod
    def identity(cls, modulus):
        return cls(modulus, (1,), 0)

    @property
    def reach(self):
        return self.start + len(self.coeffs) - 1 if self.coeffs else 0

    def compose(self, other):
        """self after other"""
        if not self.coeffs or not other.coeffs:
            return type(self)(self.modulus, ())
        conv = np.convolve(np.array(self.coeffs, dtype=np.int64), np.array(other.coeffs, dtype=np.int64))
        return type(self)(self.modulus, tuple(int(c) for c in conv % self.modulus), self.start + other.start)

    def power(self, k):
        out = type(self).identity(self.modulus)
        for _ in range(k):
            out = self.compose(out)
        return out


def banded_image(f, x):
    """f(x): every generator is convolved with the band, then re-canonicalized"""
    if f.modulus != x.modulus:
        raise CarrierMismatchError(f"band over Z/{f.modulus} applied to an element over Z/{x.modulus}")
    field = _is_field(x.body)
    if x.width == 0 or not f.coeffs:
        return window_bottom(x.modulus, field)
    cols = _blocks_of(x).columns(x.body)
    w = cols.shape[0]
    out = np.zeros((w + len(f.coeffs) - 1, cols.shape[1]), dtype=np.int64)
    for t, c in enumerate(f.coeffs):
        out[t:t + w] = (out[t:t + w] + c * cols) % f.modulus
    return _window(x.modulus, field, x.offset + f.start, out)


@dataclass(frozen=True)
class AffineCoordinateIso:
    """Coordinate relabelling i -> sign * i + shift of the direct sum"""
    sign: int
    shift: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValidationError("affine coordinate maps need sign +1 or -1")

    def __call__(self, x):
        if x.width == 0:
            return x
        cols = _blocks_of(x).columns(x.body)
        if self.sign == 1:
            return _window(x.modulus, _is_field(x.body), x.offset + self.shift, cols)
        return _window(x.modulus, _is_field(x.body), self.shift - (x.stop - 1), cols[::-1])

    def inverse(self):
        return AffineCoordinateIso(1, -self.shift) if self.sign == 1 else self

    def conjugate(self, f):
        """The band g with g = iso . f . iso^-1"""
        if self.sign == 1 or not f.coeffs:
            return f
        return BandedEndo(f.modulus, tuple(reversed(f.coeffs)), -f.reach)


class DirectSumCarrier(GqmCarrier):
    """
    Finitely supported subgroups of the direct sum of Z/m over the integers

    join = sum, d(x, y) = log [x + y : x]; in field mode the bodies are subspaces
    over GF(p) and distances are Dim.
    """
    order_convex = True
    finite_valued = True
    well_ordered_values = True

    def __init__(self, modulus, field=False, sample_budget=DEFAULT_SAMPLE_BUDGET,
                 sample_span=2, sample_width=3):
        super().__init__()
        _check_modulus(modulus, field)
        self.modulus = modulus
        self.field = field
        self.unit = DIM if field else LOG
        self.sample_budget = sample_budget
        self.sample_span = sample_span
        self.sample_width = sample_width
        self.name = f"direct_sum({'GF' if field else 'Z/'}{modulus})"
        self._bottom = window_bottom(modulus, field)

    @property
    def bottom(self):
        return self._bottom

    def _join(self, x, y):
        return window_join(x, y)

    def _dist(self, x, y):
        _check_window_pair(x, y)
        return _blocks_of(x).quotient(self.join(x, y).body, x.body)

    def _canonical(self, x):
        return _window(x.modulus, self.field, x.offset, _blocks_of(x).columns(x.body))

    def element(self, offset, generators):
        return window_element(self.modulus, offset, generators, self.field)

    def units(self, *indices):
        return unit_window(self.modulus, indices, self.field)

    def sample(self, rng):
        width = int(rng.integers(1, self.sample_width + 1))
        offset = int(rng.integers(-self.sample_span, self.sample_span + 1))
        count = int(rng.integers(0, self.sample_budget + 1))
        cols = rng.integers(0, self.modulus, size=(width, count))
        return _window(self.modulus, self.field, offset, cols)

    def owns(self, x):
        return (isinstance(x, WindowElement) and x.modulus == self.modulus
                and _blocks(self.modulus, self.field).owns(x.body))

    def to_json(self, x):
        return {'offset': x.offset, 'width': x.width, 'body': _blocks_of(x).to_json(x.body)}


# -- profinite product ------------------------------------------------------

@dataclass(frozen=True)
class OpenSubgroupRep:
    """Preimage of body under projection of the product onto its first depth coordinates"""
    modulus: int
    depth: int
    body: object


def open_whole(modulus, field=False):
    return OpenSubgroupRep(modulus, 0, _blocks(modulus, field).canonical(0, np.zeros((0, 0), dtype=np.int64)))


def open_canonical(U):
    """Minimal depth: drop trailing coordinates the body leaves free"""
    blocks = _blocks_of(U)
    body, depth = U.body, U.depth
    while depth > 0 and blocks.contains(body, np.eye(depth, dtype=np.int64)[depth - 1]):
        depth -= 1
        body = blocks.canonical(depth, blocks.columns(body)[:depth])
    return OpenSubgroupRep(U.modulus, depth, body)


def open_subgroup(modulus, depth, generators, field=False):
    """
    Open subgroup of depth coordinates generated (inside (Z/m)^depth) by the vectors

    An empty generator list gives the cylinder {x : x_0 = ... = x_(depth-1) = 0}.
    """
    vectors = [list(g) for g in generators]
    if any(len(v) != depth for v in vectors):
        raise ValidationError(f"open subgroup generators need {depth} coordinates")
    cols = np.array(vectors, dtype=np.int64).T if vectors else np.zeros((depth, 0), dtype=np.int64)
    return open_canonical(OpenSubgroupRep(modulus, depth, _blocks(modulus, field).canonical(depth, cols)))


def zero_cylinder(modulus, depth, field=False):
    return open_subgroup(modulus, depth, [], field)


def _cylinder(U, depth):
    """Body of U re-expressed at a larger depth"""
    blocks = _blocks_of(U)
    cols = blocks.columns(U.body)
    padded = np.vstack([cols, np.zeros((depth - U.depth, cols.shape[1]), dtype=np.int64)])
    free = _unit_columns(depth, range(U.depth, depth))
    return blocks.canonical(depth, np.hstack([padded, free]))


def _check_open_pair(U, V):
    if U.modulus != V.modulus or _is_field(U.body) != _is_field(V.body):
        raise CarrierMismatchError(f"open subgroups over different products: {U.modulus} vs {V.modulus}")


def open_meet(U, V):
    _check_open_pair(U, V)
    depth = max(U.depth, V.depth)
    body = _blocks_of(U).meet(_cylinder(U, depth), _cylinder(V, depth))
    return open_canonical(OpenSubgroupRep(U.modulus, depth, body))


def open_dist(U, V):
    """log [U : U meet V] read off at the common depth"""
    _check_open_pair(U, V)
    blocks = _blocks_of(U)
    depth = max(U.depth, V.depth)
    big = _cylinder(U, depth)
    return blocks.quotient(big, blocks.meet(big, _cylinder(V, depth)))


@dataclass(frozen=True)
class BandedCausalEndo(BandedEndo):
    """Continuous endomorphism f(x)_i = sum_t coeffs[t] x_(i + start + t) of the product"""

    def __post_init__(self):
        super().__post_init__()
        if self.start < 0:
            raise ValidationError(f"causal band must start at a non-negative offset, got {self.start}")

    def apply(self, vector):
        """Leading coordinates of f(x) determined by a finite prefix of x"""
        x = np.asarray(vector, dtype=np.int64)
        length = x.size - self.reach
        out = np.zeros(max(length, 0), dtype=np.int64)
        for t, c in enumerate(self.coeffs):
            out = out + c * x[self.start + t:self.start + t + out.size]
        return out % self.modulus

    def matrix(self, depth):
        """depth x (depth + reach) matrix of x -> f(x) on leading coordinates"""
        M = np.zeros((depth, depth + self.reach), dtype=np.int64)
        for i in range(depth):
            for t, c in enumerate(self.coeffs):
                M[i, i + self.start + t] = c
        return M


def causal_preimage(f, U):
    if f.modulus != U.modulus:
        raise CarrierMismatchError(f"band over Z/{f.modulus} applied to an open subgroup over Z/{U.modulus}")
    if U.depth == 0:
        return U
    field = _is_field(U.body)
    if not f.coeffs:
        return open_whole(U.modulus, field)
    width = U.depth + f.reach
    body = _blocks_of(U).preimage(f.matrix(U.depth), U.body, width)
    return open_canonical(OpenSubgroupRep(U.modulus, width, body))


class ProfiniteCarrier(GqmCarrier):
    """
    Open subgroups of the product of Z/m with intersection as join

    bottom = the whole group, d*(U, V) = log [U : U meet V]; field mode gives the
    linearly compact open subspaces with Dim distances.
    """
    order_convex = True
    finite_valued = True
    well_ordered_values = True

    def __init__(self, modulus, field=False, sample_budget=DEFAULT_SAMPLE_BUDGET, sample_depth=3):
        super().__init__()
        _check_modulus(modulus, field)
        self.modulus = modulus
        self.field = field
        self.unit = DIM if field else LOG
        self.sample_budget = sample_budget
        self.sample_depth = sample_depth
        self.name = f"profinite({'GF' if field else 'Z/'}{modulus})"
        self._bottom = open_whole(modulus, field)

    @property
    def bottom(self):
        return self._bottom

    def _join(self, x, y):
        return open_meet(x, y)

    def _dist(self, x, y):
        return open_dist(x, y)

    def _canonical(self, x):
        blocks = _blocks_of(x)
        body = blocks.canonical(x.depth, blocks.columns(x.body))
        return open_canonical(OpenSubgroupRep(x.modulus, x.depth, body))

    def element(self, depth, generators):
        return open_subgroup(self.modulus, depth, generators, self.field)

    def sample(self, rng):
        depth = int(rng.integers(0, self.sample_depth + 1))
        count = int(rng.integers(0, self.sample_budget + 1))
        cols = rng.integers(0, self.modulus, size=(depth, count))
        body = _blocks(self.modulus, self.field).canonical(depth, cols)
        return open_canonical(OpenSubgroupRep(self.modulus, depth, body))

    def owns(self, x):
        return (isinstance(x, OpenSubgroupRep) and x.modulus == self.modulus
                and _blocks(self.modulus, self.field).owns(x.body))

    def to_json(self, x):
        return {'depth': x.depth, 'body': _blocks_of(x).to_json(x.body)}


def standard_probes(carrier, count, window):
    """
    Deterministic probe family

    Direct sum: block windows <e_0, ..., e_(j-1)> for j = 1..window, then the
    single-generator windows <e_0 + e_j>. Profinite: the whole group, the zero
    cylinders of depth 1..window, then every other open subgroup of depth <= window.
    """
    if count < 1 or count > MAX_PROBES:
        raise BudgetError(f"probe count {count} outside [1, {MAX_PROBES}]")
    if window < 1 or window > MAX_WINDOW:
        raise BudgetError(f"probe window {window} outside [1, {MAX_WINDOW}]")
    probes = []
    if isinstance(carrier, DirectSumCarrier):
        for j in range(1, window + 1):
            probes.append(carrier.units(*range(j)))
        for j in range(1, window):
            cols = np.zeros((j + 1, 1), dtype=np.int64)
            cols[0, 0] = cols[j, 0] = 1
            probes.append(_window(carrier.modulus, carrier.field, 0, cols))
    elif isinstance(carrier, ProfiniteCarrier):
        m, field = carrier.modulus, carrier.field
        if m ** window > DEFAULT_ELEMENT_BUDGET:
            raise BudgetError(f"enumerating open subgroups of depth {window} exceeds the element budget")
        probes.append(carrier.bottom)
        probes.extend(zero_cylinder(m, j, field) for j in range(1, window + 1))
        if field:
            bodies = enumerate_subspaces(VectorSpace(m, window))
        else:
            bodies = enumerate_subgroups(FiniteAbelianGroup((m,) * window))
        probes.extend(open_canonical(OpenSubgroupRep(m, window, b)) for b in bodies)
    else:
        raise ConfigError(f"no standard probes for carrier {carrier.name}")
    return list(dict.fromkeys(probes))[:count]
