"""
Scenario Module for gqm
Reads a scenario document, validates every field and builds the objects a command runs on
"""
import json
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from carriers_finite import (AbEndo, FiniteAbelianGroup, LinMap, SubgroupJoinCarrier, VectorSpace, _freeze,
                             endo_image, linmap_image, subgroup_canonicalize, subspace_canonicalize)
from carriers_windowed import (AffineCoordinateIso, BandedCausalEndo, BandedEndo, DirectSumCarrier,
                               ProfiniteCarrier, standard_probes)
from core import DistortedCarrier, GqmError, ScenarioError, log
from dynamics import (DEFAULT_CLOSURE_DEPTH, DEFAULT_CONFIRM_WINDOW, DEFAULT_N_MAX, DEFAULT_PAIR_LIMIT,
                      DEFAULT_VALIDATION_SAMPLES, OmegaSet)
from functors import DirectSum, FunctorKind, NamedEntropy, ProfiniteProduct, build_flow, carrier_for
from linalg import inverse_mod

SCHEMA_VERSION = 1

FAMILIES = ('subgroup_vee', 'subgroup_wedge', 'subspace_vee', 'subspace_wedge', 'direct_sum', 'profinite',
            'distorted')

DEFAULT_KIND = {
    'subgroup_vee': FunctorKind.S_VEE,
    'subgroup_wedge': FunctorKind.S_WEDGE,
    'subspace_vee': FunctorKind.S_VEE,
    'subspace_wedge': FunctorKind.S_WEDGE,
    'direct_sum': FunctorKind.S_VEE,
    'profinite': FunctorKind.S_WEDGE,
    'distorted': FunctorKind.S_VEE,
}

CONFIG_DEFAULTS = {
    'n_max': DEFAULT_N_MAX,
    'confirm_window': DEFAULT_CONFIRM_WINDOW,
    'closure_depth': DEFAULT_CLOSURE_DEPTH,
    'seed': 0,
    'log_base': 'e',
    'samples': DEFAULT_VALIDATION_SAMPLES,
    'ks': [2, 3, 4],
    'suite_n': 16,
    'pair_limit': DEFAULT_PAIR_LIMIT,
    'exhaustive': False,
}

LOG_BASES = ('e', '2', '10', 'p')


@contextmanager
def at(path):
    """Re-raise any library error met while reading a field as a ScenarioError for that field"""
    try:
        yield
    except ScenarioError:
        raise
    except (GqmError, ValueError, TypeError) as e:
        raise ScenarioError(str(e), path) from e


def _expect_keys(block, path, required, optional=()):
    if not isinstance(block, dict):
        raise ScenarioError("expected an object", path)
    for key in block:
        if key not in required and key not in optional:
            raise ScenarioError(f"unknown field '{key}'", f"{path}/{key}")
    for key in required:
        if key not in block:
            raise ScenarioError("missing required field", f"{path}/{key}")


def _int(value, path, low=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"expected an integer, got {value!r}", path)
    if low is not None and value < low:
        raise ScenarioError(f"must be at least {low}, got {value}", path)
    return value


def _int_list(value, path):
    if not isinstance(value, list):
        raise ScenarioError("expected a list", path)
    return [_int(v, f"{path}/{i}") for i, v in enumerate(value)]


def _matrix(value, path):
    if not isinstance(value, list) or not value:
        raise ScenarioError("expected a non-empty list of rows", path)
    return [_int_list(row, f"{path}/{i}") for i, row in enumerate(value)]


@dataclass
class Conjugacy:
    """Isometric isomorphism of the scenario carrier and the flow it conjugates to"""
    iso: object
    inverse: object
    endo: object
    label: str


@dataclass
class Scenario:
    """A validated scenario: the object, its carrier, the map, probes and run configuration"""
    name: str
    family: str
    obj: object
    carrier: object
    kind: FunctorKind
    named: NamedEntropy = None
    restricted: bool = False
    endo: object = None
    probes: list = field(default_factory=list)
    conjugacy: Conjugacy = None
    omega_endos: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)

    @property
    def modulus(self):
        if isinstance(self.obj, FiniteAbelianGroup):
            if len(set(self.obj.moduli)) > 1:
                raise ScenarioError(f"log base p needs one modulus, the group has {list(self.obj.moduli)}",
                                    '/config/log_base')
            return self.obj.moduli[0]
        if isinstance(self.obj, VectorSpace):
            return self.obj.p
        return self.obj.modulus

    def log_base(self):
        """(base, label) for float rendering; base None means natural log"""
        label = self.config['log_base']
        if label == 'e':
            return None, 'e'
        if label == 'p':
            return self.modulus, str(self.modulus)
        return int(label), label

    def require_endo(self):
        if self.endo is None:
            raise ScenarioError("this command needs an endomorphism", '/endomorphism')
        if self.family == 'distorted':
            raise ScenarioError("distorted carriers only support the axioms command", '/carrier/family')
        return self.endo

    def flow(self, kind=None, endo=None):
        """Validated flow of endo (default: the scenario's) lifted through kind"""
        endo = endo if endo is not None else self.require_endo()
        with at('/endomorphism'):
            return build_flow(kind or self.kind, self.obj, endo, self.config['samples'], self.config['seed'])

    def omega(self):
        if not self.omega_endos:
            raise ScenarioError("this command needs a non-empty omega list", '/omega')
        flows = []
        for i, endo in enumerate(self.omega_endos):
            with at(f'/omega/{i}'):
                flows.append(build_flow(self.kind, self.obj, endo, self.config['samples'], self.config['seed']))
        return OmegaSet(self.carrier, flows)


# -- readers -----------------------------------------------------------------

def _read_object(block):
    path = '/carrier'
    _expect_keys(block, path, ('family',), ('moduli', 'p', 'n', 'modulus', 'field'))
    family = block['family']
    if family not in FAMILIES:
        raise ScenarioError(f"unknown family '{family}', expected one of {list(FAMILIES)}", f'{path}/family')
    with at(path):
        if family in ('subgroup_vee', 'subgroup_wedge', 'distorted'):
            _expect_keys(block, path, ('family', 'moduli'))
            return family, FiniteAbelianGroup(tuple(_int_list(block['moduli'], f'{path}/moduli')))
        if family in ('subspace_vee', 'subspace_wedge'):
            _expect_keys(block, path, ('family', 'p', 'n'))
            return family, VectorSpace(_int(block['p'], f'{path}/p', 2), _int(block['n'], f'{path}/n', 1))
        _expect_keys(block, path, ('family', 'modulus'), ('field',))
        field_mode = block.get('field', False)
        if not isinstance(field_mode, bool):
            raise ScenarioError("expected true or false", f'{path}/field')
        modulus = _int(block['modulus'], f'{path}/modulus', 2)
        if family == 'direct_sum':
            DirectSumCarrier(modulus, field_mode)
            return family, DirectSum(modulus, field_mode)
        ProfiniteCarrier(modulus, field_mode)
        return family, ProfiniteProduct(modulus, field_mode)


def _read_kind(document, family):
    """(kind, named, restricted) from the optional functor block"""
    block = document.get('functor')
    if block is None:
        return DEFAULT_KIND[family], None, False
    path = '/functor'
    _expect_keys(block, path, (), ('kind', 'named', 'restricted'))
    if ('kind' in block) == ('named' in block):
        raise ScenarioError("give exactly one of 'kind' or 'named'", path)
    restricted = block.get('restricted', False)
    if not isinstance(restricted, bool):
        raise ScenarioError("expected true or false", f'{path}/restricted')
    if 'kind' in block:
        with at(f'{path}/kind'):
            kind = FunctorKind(block['kind'])
        named = None
    else:
        with at(f'{path}/named'):
            named = NamedEntropy(block['named'])
        kind = named.restricted_kind if restricted else named.kind
    if kind.join_side != DEFAULT_KIND[family].join_side:
        raise ScenarioError(f"{kind.value} does not act on the {family} carrier", path)
    return kind, named, restricted


def _read_endo(block, obj, path):
    if not isinstance(block, dict) or 'type' not in block:
        raise ScenarioError("expected an object with a 'type'", path)
    kind = block['type']
    with at(path):
        if kind == 'identity':
            _expect_keys(block, path, ('type',))
            if isinstance(obj, FiniteAbelianGroup):
                return AbEndo.identity(obj)
            if isinstance(obj, VectorSpace):
                return LinMap.identity(obj)
            band = BandedCausalEndo if isinstance(obj, ProfiniteProduct) else BandedEndo
            return band.identity(obj.modulus)
        if kind == 'matrix':
            _expect_keys(block, path, ('type', 'rows'))
            rows = _freeze(_matrix(block['rows'], f'{path}/rows'))
            if isinstance(obj, FiniteAbelianGroup):
                return AbEndo(obj, rows)
            if isinstance(obj, VectorSpace):
                return LinMap(obj, rows)
            raise ScenarioError("matrix endomorphisms need a finite carrier; use 'band'", f'{path}/type')
        if kind == 'band':
            _expect_keys(block, path, ('type', 'coeffs'), ('start',))
            if not isinstance(obj, (DirectSum, ProfiniteProduct)):
                raise ScenarioError("band endomorphisms need a direct_sum or profinite carrier", f'{path}/type')
            coeffs = tuple(_int_list(block['coeffs'], f'{path}/coeffs'))
            start = _int(block.get('start', 0), f'{path}/start')
            band = BandedCausalEndo if isinstance(obj, ProfiniteProduct) else BandedEndo
            return band(obj.modulus, coeffs, start)
    raise ScenarioError(f"unknown endomorphism type '{kind}'", f'{path}/type')


def _read_probes(block, obj, carrier, config):
    path = '/probes'
    if not isinstance(block, dict) or 'type' not in block:
        raise ScenarioError("expected an object with a 'type'", path)
    kind = block['type']
    with at(path):
        if kind == 'generators':
            _expect_keys(block, path, ('type', 'items'))
            if not isinstance(obj, (FiniteAbelianGroup, VectorSpace)):
                raise ScenarioError("generator probes need a finite carrier", f'{path}/type')
            make = subgroup_canonicalize if isinstance(obj, FiniteAbelianGroup) else subspace_canonicalize
            return [make(obj, _matrix(item, f'{path}/items/{i}') if item else [])
                    for i, item in enumerate(_list(block['items'], f'{path}/items'))]
        if kind == 'windows':
            _expect_keys(block, path, ('type', 'items'))
            if not isinstance(carrier, DirectSumCarrier):
                raise ScenarioError("window probes need a direct_sum carrier", f'{path}/type')
            out = []
            for i, item in enumerate(_list(block['items'], f'{path}/items')):
                item_path = f'{path}/items/{i}'
                _expect_keys(item, item_path, ('offset', 'generators'))
                gens = _matrix(item['generators'], f'{item_path}/generators') if item['generators'] else []
                out.append(carrier.element(_int(item['offset'], f'{item_path}/offset'), gens))
            return out
        if kind == 'cylinders':
            _expect_keys(block, path, ('type', 'items'))
            if not isinstance(carrier, ProfiniteCarrier):
                raise ScenarioError("cylinder probes need a profinite carrier", f'{path}/type')
            out = []
            for i, item in enumerate(_list(block['items'], f'{path}/items')):
                item_path = f'{path}/items/{i}'
                _expect_keys(item, item_path, ('depth', 'generators'))
                gens = _matrix(item['generators'], f'{item_path}/generators') if item['generators'] else []
                out.append(carrier.element(_int(item['depth'], f'{item_path}/depth', 0), gens))
            return out
        if kind == 'standard':
            _expect_keys(block, path, ('type', 'count'), ('window',))
            count = _int(block['count'], f'{path}/count', 1)
            if isinstance(carrier, (DirectSumCarrier, ProfiniteCarrier)):
                window = _int(block.get('window', 2), f'{path}/window', 1)
                return standard_probes(carrier, count, window)
            finite = carrier.base if isinstance(carrier, DistortedCarrier) else carrier
            return list(finite.elements())[:count]
        if kind == 'sampled':
            _expect_keys(block, path, ('type', 'count'))
            rng = np.random.default_rng(config['seed'])
            return [carrier.sample(rng) for _ in range(_int(block['count'], f'{path}/count', 1))]
    raise ScenarioError(f"unknown probe type '{kind}'", f'{path}/type')


def _list(value, path):
    if not isinstance(value, list) or not value:
        raise ScenarioError("expected a non-empty list", path)
    return value


def _read_conjugacy(block, obj, endo):
    path = '/conjugacy'
    if not isinstance(block, dict) or 'type' not in block:
        raise ScenarioError("expected an object with a 'type'", path)
    if endo is None:
        raise ScenarioError("conjugacy needs an endomorphism", '/endomorphism')
    kind = block['type']
    with at(path):
        if kind == 'affine':
            _expect_keys(block, path, ('type', 'sign'), ('shift',))
            if not isinstance(obj, DirectSum):
                raise ScenarioError("affine coordinate maps need a direct_sum carrier", f'{path}/type')
            iso = AffineCoordinateIso(_int(block['sign'], f'{path}/sign'), _int(block.get('shift', 0),
                                                                                 f'{path}/shift'))
            return Conjugacy(iso, iso.inverse(), iso.conjugate(endo), f"affine({iso.sign}, {iso.shift})")
        if kind == 'basis_change':
            _expect_keys(block, path, ('type', 'rows'))
            rows = np.array(_matrix(block['rows'], f'{path}/rows'), dtype=np.int64)
            if isinstance(obj, VectorSpace):
                modulus, wrap, image = obj.p, LinMap, linmap_image
            elif isinstance(obj, FiniteAbelianGroup) and len(set(obj.moduli)) == 1:
                modulus, wrap, image = obj.moduli[0], AbEndo, endo_image
            else:
                raise ScenarioError("basis changes need a subspace carrier or a group with one modulus",
                                    f'{path}/type')
            try:
                inverse_rows = inverse_mod(rows, modulus)
            except ValueError as e:
                raise ScenarioError(f"matrix is not invertible mod {modulus}", f'{path}/rows') from e
            P, Q = wrap(obj, _freeze(rows)), wrap(obj, _freeze(inverse_rows))
            conjugated = P.compose(endo).compose(Q)
            return Conjugacy(lambda H: image(P, H), lambda H: image(Q, H), conjugated, 'basis_change')
    raise ScenarioError(f"unknown conjugacy type '{kind}'", f'{path}/type')


def _read_config(block, overrides):
    path = '/config'
    config = dict(CONFIG_DEFAULTS)
    if block is not None:
        _expect_keys(block, path, (), tuple(CONFIG_DEFAULTS))
        config.update(block)
    config.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for key in ('n_max', 'confirm_window', 'closure_depth', 'samples', 'suite_n', 'pair_limit'):
        _int(config[key], f'{path}/{key}', 1)
    _int(config['seed'], f'{path}/seed', 0)
    if config['n_max'] < 2:
        raise ScenarioError("must be at least 2", f'{path}/n_max')
    config['log_base'] = str(config['log_base'])
    if config['log_base'] not in LOG_BASES:
        raise ScenarioError(f"expected one of {list(LOG_BASES)}", f'{path}/log_base')
    ks = config['ks']
    config['ks'] = [_int(k, f'{path}/ks/{i}', 1) for i, k in enumerate(_list(ks, f'{path}/ks'))]
    if not isinstance(config['exhaustive'], bool):
        raise ScenarioError("expected true or false", f'{path}/exhaustive')
    return config


TOP_LEVEL = ('schema_version', 'name', 'carrier', 'endomorphism', 'functor', 'probes', 'conjugacy', 'omega',
             'config')


def parse_scenario(document, overrides=None):
    """
    Validate a scenario document and build its objects

    Args:
        document: parsed JSON object
        overrides: command-line values that take precedence over the config block

    Raises:
        ScenarioError: with the path of the first offending field
    """
    _expect_keys(document, '', ('schema_version', 'carrier'), TOP_LEVEL)
    if document['schema_version'] != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema version {document['schema_version']!r}, expected "
                            f"{SCHEMA_VERSION}", '/schema_version')
    name = document.get('name', 'scenario')
    if not isinstance(name, str):
        raise ScenarioError("expected a string", '/name')
    config = _read_config(document.get('config'), overrides)
    family, obj = _read_object(document['carrier'])
    kind, named, restricted = _read_kind(document, family)
    if family == 'distorted':
        carrier = DistortedCarrier(SubgroupJoinCarrier(obj))
    else:
        carrier = carrier_for(obj, kind.join_side)
    endo = None
    if 'endomorphism' in document:
        endo = _read_endo(document['endomorphism'], obj, '/endomorphism')
    probes = []
    if 'probes' in document:
        probes = _read_probes(document['probes'], obj, carrier, config)
    conjugacy = None
    if 'conjugacy' in document:
        conjugacy = _read_conjugacy(document['conjugacy'], obj, endo)
    omega = [_read_endo(b, obj, f'/omega/{i}') for i, b in enumerate(_list(document['omega'], '/omega'))] \
        if 'omega' in document else []
    scenario = Scenario(name, family, obj, carrier, kind, named, restricted, endo, probes, conjugacy, omega,
                        config, document)
    scenario.log_base()
    log('APP', f"scenario '{name}': {carrier.name}, {len(probes)} probes")
    return scenario


def load_scenario(path, overrides=None):
    try:
        with open(path) as f:
            document = json.load(f)
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_scenario(document, overrides)
