"""
Core Module for gqm
Extended distances, the generalized quasimetric semilattice contract and the axiom checker
"""
import itertools
import math
import os
import sys
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache, total_ordering

import numpy as np

LOG = 'log'
DIM = 'dim'
INF = 'inf'

DEFAULT_SAMPLE_BUDGET = 3        # generators per sampled element
DEFAULT_ELEMENT_BUDGET = 4096    # exhaustive enumeration limit
DEFAULT_CACHE_SIZE = 65536

VERBOSE = os.getenv('GQM_VERBOSE', '') not in ('', '0')


def log(tag, message):
    """Print a tagged diagnostic line to stderr when GQM_VERBOSE is set"""
    if VERBOSE:
        print(f"[{tag}] {message}", file=sys.stderr)


class GqmError(Exception):
    """Base class for every error raised by gqm"""


class CarrierMismatchError(GqmError):
    """An element does not belong to the carrier it was handed to"""


class PreconditionError(GqmError):
    """An operation was called outside its domain"""


class ConfigError(GqmError):
    """A configuration value is out of range"""


class BudgetError(GqmError):
    """An enumeration would exceed its element budget"""


class ValidationError(GqmError):
    """A map or object failed a validity check"""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ScenarioError(GqmError):
    """A scenario document is malformed; path points at the offending field"""

    def __init__(self, message, path=''):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or '/'


@total_ordering
@dataclass(frozen=True)
class ExtDist:
    """
    Exact extended non-negative distance

    Finite values are LogInt(k) meaning log k (nats) or Dim(n) in dimension
    units; Infinity dominates both.
    """
    unit: str
    magnitude: int

    @classmethod
    def log(cls, k):
        k = int(k)
        if k < 1:
            raise ValueError(f"log distance needs a positive integer, got {k}")
        return cls(LOG, k)

    @classmethod
    def dim(cls, n):
        n = int(n)
        if n < 0:
            raise ValueError(f"dimension distance must be non-negative, got {n}")
        return cls(DIM, n)

    @classmethod
    def infinity(cls):
        return cls(INF, 0)

    @classmethod
    def zero(cls, unit):
        return cls.log(1) if unit == LOG else cls.dim(0)

    @property
    def is_finite(self):
        return self.unit != INF

    @property
    def is_zero(self):
        return (self.unit == LOG and self.magnitude == 1) or (self.unit == DIM and self.magnitude == 0)

    def _same_unit(self, other):
        if self.unit != other.unit:
            raise TypeError(f"cannot combine {self.unit} and {other.unit} distances")

    def __add__(self, other):
        if not self.is_finite or not other.is_finite:
            return ExtDist.infinity()
        self._same_unit(other)
        if self.unit == LOG:
            return ExtDist(LOG, self.magnitude * other.magnitude)
        return ExtDist(DIM, self.magnitude + other.magnitude)

    def scale(self, k):
        """k-fold sum of this distance (k a non-negative integer)"""
        if k < 0:
            raise ValueError("scale factor must be non-negative")
        if not self.is_finite:
            return self
        if self.unit == LOG:
            return ExtDist(LOG, self.magnitude ** k)
        return ExtDist(DIM, self.magnitude * k)

    def __lt__(self, other):
        if not isinstance(other, ExtDist):
            return NotImplemented
        if not other.is_finite:
            return self.is_finite
        if not self.is_finite:
            return False
        self._same_unit(other)
        return self.magnitude < other.magnitude

    def to_float(self, steps=1, base=None):
        """Float rendering of magnitude/steps; base only applies to log units"""
        if not self.is_finite:
            return math.inf
        if self.unit == DIM:
            return self.magnitude / steps
        value = math.log(self.magnitude) / steps
        if base is not None:
            value /= math.log(base)
        return value

    def to_json(self):
        if self.unit == INF:
            return {'unit': INF}
        return {'unit': self.unit, 'k' if self.unit == LOG else 'value': self.magnitude}

    def __str__(self):
        if self.unit == INF:
            return 'inf'
        if self.unit == LOG:
            return f"log {self.magnitude}"
        return f"dim {self.magnitude}"


@dataclass(frozen=True, eq=False)
class Rate:
    """Exact per-step value numerator/steps, compared by cross-scaling"""
    numerator: ExtDist
    steps: int = 1

    def _key(self, other):
        return self.numerator.scale(other.steps), other.numerator.scale(self.steps)

    def __eq__(self, other):
        if not isinstance(other, Rate):
            return NotImplemented
        left, right = self._key(other)
        return left == right

    __hash__ = None

    def __lt__(self, other):
        left, right = self._key(other)
        return left < right

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    def times(self, k):
        return Rate(self.numerator.scale(k), self.steps)

    @property
    def is_zero(self):
        return self.numerator.is_zero

    def to_float(self, base=None):
        return self.numerator.to_float(self.steps, base)

    def to_json(self, base=None, base_label='e'):
        doc = {'numerator': self.numerator.to_json(), 'steps': self.steps}
        value = self.to_float(base)
        doc['float'] = None if math.isinf(value) else value
        doc['base'] = base_label if self.numerator.unit == LOG else None
        return doc

    def __str__(self):
        if self.steps == 1:
            return str(self.numerator)
        return f"({self.numerator})/{self.steps}"


class GqmCarrier(ABC):
    """
    Generalized quasimetric semilattice with exact distances

    Subclasses implement _join/_dist/_canonical and the element plumbing; join,
    dist and canonical are memoized per instance since elements are immutable
    hashable values.
    """
    name = 'carrier'
    unit = LOG
    order_convex = True
    finite_valued = True
    well_ordered_values = True

    def __init__(self, cache_size=DEFAULT_CACHE_SIZE):
        self.join = lru_cache(maxsize=cache_size)(self._join)
        self.dist = lru_cache(maxsize=cache_size)(self._dist)
        self.canonical = lru_cache(maxsize=cache_size)(self._canonical)

    @property
    @abstractmethod
    def bottom(self):
        """Bottom element"""

    @abstractmethod
    def _join(self, x, y):
        """Semilattice join of canonical elements"""

    @abstractmethod
    def _dist(self, x, y):
        """Generalized quasimetric d(x, y)"""

    @abstractmethod
    def _canonical(self, x):
        """Canonical representative of x"""

    @abstractmethod
    def sample(self, rng):
        """Draw an element with a numpy Generator"""

    @abstractmethod
    def owns(self, x):
        """True if x is an element of this carrier"""

    def to_json(self, x):
        return repr(x)

    def require(self, *elements):
        for x in elements:
            if not self.owns(x):
                raise CarrierMismatchError(f"{x!r} is not an element of {self.name}")

    def describe(self):
        return {
            'name': self.name,
            'unit': self.unit,
            'order_convex': self.order_convex,
            'finite_valued': self.finite_valued,
            'well_ordered_values': self.well_ordered_values,
        }


def leq(S, x, y):
    """x <= y in the dual specialization order, i.e. d(y, x) = 0"""
    S.require(x, y)
    return S.dist(y, x).is_zero


def close(S, x, y):
    """Both directed distances are finite"""
    S.require(x, y)
    return S.dist(x, y).is_finite and S.dist(y, x).is_finite


def in_Fd(S, x):
    """x lies at finite distance from the bottom element"""
    S.require(x)
    return S.dist(S.bottom, x).is_finite


def generated_subsemilattice(S, generators, budget=DEFAULT_ELEMENT_BUDGET):
    """All joins of the given elements (bottom included), in discovery order"""
    S.require(*generators)
    found = {S.bottom: None}
    frontier = [S.bottom]
    gens = list(dict.fromkeys(S.canonical(g) for g in generators))
    while frontier:
        following = []
        for a in frontier:
            for g in gens:
                j = S.join(a, g)
                if j not in found:
                    found[j] = None
                    following.append(j)
                    if len(found) > budget:
                        raise BudgetError(f"generated subsemilattice exceeds {budget} elements")
        frontier = following
    return list(found)


def in_saturation(S, x, generators, budget=DEFAULT_ELEMENT_BUDGET):
    """x is close to some element of the subsemilattice generated by generators"""
    S.require(x)
    return any(close(S, x, y) for y in generated_subsemilattice(S, generators, budget))


# -- axiom audit -------------------------------------------------------------

AXIOMS = ('QM1', 'QM2', 'QM3', 'M1', 'M2', 'JOINT', 'OC', 'SEMILATTICE', 'ORDER', 'FINITE')


@dataclass
class Counterexample:
    """Elements and observed distances witnessing a failed axiom"""
    axiom: str
    index: int
    elements: tuple
    distances: dict

    def to_json(self, S):
        return {
            'axiom': self.axiom,
            'sample': self.index,
            'elements': [S.to_json(x) for x in self.elements],
            'distances': {k: v.to_json() if isinstance(v, ExtDist) else v for k, v in self.distances.items()},
        }


@dataclass
class AxiomReport:
    """Per-axiom pass counts and the first counterexample of each failed axiom"""
    carrier: str
    mode: str
    sample_count: int
    seed: object
    passes: dict = field(default_factory=dict)
    checked: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures

    @property
    def violations(self):
        return sum(self.checked[a] - self.passes[a] for a in self.checked)

    def record(self, axiom, counterexample):
        self.checked[axiom] = self.checked.get(axiom, 0) + 1
        if counterexample is None:
            self.passes[axiom] = self.passes.get(axiom, 0) + 1
            return
        self.passes.setdefault(axiom, 0)
        current = self.failures.get(axiom)
        if current is None or counterexample.index < current.index:
            self.failures[axiom] = counterexample

    def to_json(self, S):
        return {
            'carrier': self.carrier,
            'mode': self.mode,
            'sample_count': self.sample_count,
            'seed': self.seed,
            'ok': self.ok,
            'violations': self.violations,
            'axioms': {
                a: {'checked': self.checked[a], 'passed': self.passes.get(a, 0)}
                for a in AXIOMS if a in self.checked
            },
            'counterexamples': {a: c.to_json(S) for a, c in sorted(self.failures.items())},
        }


def _fail(axiom, index, elements, **distances):
    return Counterexample(axiom, index, tuple(elements), distances)


def _check_pair(S, index, x, y):
    """Checks that need two elements; yields (axiom, counterexample-or-None)"""
    dxy, dyx = S.dist(x, y), S.dist(y, x)
    both_zero = dxy.is_zero and dyx.is_zero
    same = S.canonical(x) == S.canonical(y)
    yield 'QM1', None if both_zero == same else _fail('QM1', index, (x, y), d_xy=dxy, d_yx=dyx)
    xx = S.join(x, S.bottom)
    d1, d2 = S.dist(x, xx), S.dist(xx, x)
    ok = d1.is_zero and d2.is_zero and xx == S.canonical(x)
    yield 'QM1', None if ok else _fail('QM1', index, (x, xx), d_xy=d1, d_yx=d2)
    j = S.join(x, y)
    djoin = S.dist(x, j)
    yield 'QM3', None if dxy == djoin else _fail('QM3', index, (x, y), d_xy=dxy, d_x_join=djoin)
    lattice_ok = S.join(y, x) == j and S.join(x, x) == S.canonical(x) and xx == S.canonical(x)
    yield 'SEMILATTICE', None if lattice_ok else _fail('SEMILATTICE', index, (x, y))
    order_ok = S.dist(j, x).is_zero and (dyx.is_zero == (j == S.canonical(y)))
    yield 'ORDER', None if order_ok else _fail('ORDER', index, (x, y), d_yx=dyx)
    if S.finite_valued:
        yield 'FINITE', None if dxy.is_finite else _fail('FINITE', index, (x, y), d_xy=dxy)


def _check_triple(S, index, x, y, z):
    dxy, dyz, dxz = S.dist(x, y), S.dist(y, z), S.dist(x, z)
    yield 'QM2', None if dxz <= dxy + dyz else _fail('QM2', index, (x, y, z), d_xz=dxz, d_xy=dxy, d_yz=dyz)
    xp = S.join(x, z)
    dxpy = S.dist(xp, y)
    yield 'M1', None if dxpy <= dxy else _fail('M1', index, (x, xp, y), d_xpy=dxpy, d_xy=dxy)
    yp = S.join(y, z)
    dxyp = S.dist(x, yp)
    yield 'M2', None if dxy <= dxyp else _fail('M2', index, (x, y, yp), d_xy=dxy, d_xyp=dxyp)
    assoc = S.join(S.join(x, y), z) == S.join(x, S.join(y, z))
    yield 'SEMILATTICE', None if assoc else _fail('SEMILATTICE', index, (x, y, z))
    if S.order_convex:
        b = S.join(x, y)
        c = S.join(b, z)
        dac, dab, dbc = S.dist(x, c), S.dist(x, b), S.dist(b, c)
        yield 'OC', None if dac == dab + dbc else _fail('OC', index, (x, b, c), d_ac=dac, d_ab=dab, d_bc=dbc)


def _check_quad(S, index, x, y, z, w):
    lhs = S.dist(S.join(x, z), S.join(y, w))
    rhs = S.dist(x, y) + S.dist(z, w)
    yield 'JOINT', None if lhs <= rhs else _fail('JOINT', index, (x, z, y, w), lhs=lhs, rhs=rhs)


def _audit_chunk(S, chunk):
    results = []
    for index, (x, y, z, w) in chunk:
        for check in (_check_pair(S, index, x, y), _check_triple(S, index, x, y, z),
                      _check_quad(S, index, x, y, z, w)):
            results.extend(check)
    return results


def check_axioms(S, sample_count, seed, workers=None):
    """
    Randomized audit of QM1-QM3, M1, M2, joint subadditivity and OC

    Args:
        S: carrier under audit
        sample_count: number of random quadruples
        seed: integer seed; the report is a function of (seed, sample_count) only
        workers: worker count for the scheduler (None reads GQM_WORKERS)

    Returns:
        AxiomReport; failures are reported, never raised
    """
    from scheduler import JobScheduler

    if sample_count < 1:
        raise ConfigError("sample_count must be positive")
    rng = np.random.default_rng(seed)
    draws = [(i, tuple(S.sample(rng) for _ in range(4))) for i in range(sample_count)]
    pool = JobScheduler(workers)
    chunks = pool.partition(draws)
    report = AxiomReport(S.name, 'sampled', sample_count, seed)
    for results in pool.map(lambda chunk: _audit_chunk(S, chunk), chunks):
        for axiom, counterexample in results:
            report.record(axiom, counterexample)
    log('CORE', f"{S.name}: {sample_count} samples, {report.violations} violations")
    return report


def check_axioms_exhaustive(S, elements):
    """Audit every pair, triple and quadruple drawn from a finite element list"""
    elements = list(dict.fromkeys(S.canonical(e) for e in elements))
    report = AxiomReport(S.name, 'exhaustive', len(elements), None)
    index = 0
    for x, y in itertools.product(elements, repeat=2):
        for axiom, c in _check_pair(S, index, x, y):
            report.record(axiom, c)
        index += 1
    for x, y, z in itertools.product(elements, repeat=3):
        for axiom, c in _check_triple(S, index, x, y, z):
            report.record(axiom, c)
        index += 1
    for x, y, z, w in itertools.product(elements, repeat=4):
        for axiom, c in _check_quad(S, index, x, y, z, w):
            report.record(axiom, c)
        index += 1
    log('CORE', f"{S.name}: exhaustive audit over {len(elements)} elements, {report.violations} violations")
    return report


class DistortedCarrier(GqmCarrier):
    """
    Audit fixture: a carrier whose distance is zeroed everywhere except one pair

    Used to confirm that the checker catches broken distances.
    """

    def __init__(self, base, keep=None):
        super().__init__()
        self.base = base
        self.keep = keep
        self.name = f"distorted({base.name})"
        self.unit = base.unit
        self.order_convex = base.order_convex
        self.finite_valued = base.finite_valued
        self.well_ordered_values = base.well_ordered_values

    @property
    def bottom(self):
        return self.base.bottom

    def _join(self, x, y):
        return self.base.join(x, y)

    def _dist(self, x, y):
        if self.keep is not None and (x, y) == self.keep:
            return self.base.dist(x, y)
        return ExtDist.zero(self.unit)

    def _canonical(self, x):
        return self.base.canonical(x)

    def sample(self, rng):
        return self.base.sample(rng)

    def owns(self, x):
        return self.base.owns(x)

    def to_json(self, x):
        return self.base.to_json(x)
