"""
Functors Module for gqm
Lifts endomorphisms of groups and vector spaces to flows on their subgroup or subspace
semilattices, and names the six entropies they produce
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from carriers_finite import (AbEndo, FiniteAbelianGroup, LinMap, SubgroupJoinCarrier, SubgroupMeetCarrier,
                             SubspaceJoinCarrier, SubspaceMeetCarrier, VectorSpace, endo_image, endo_preimage,
                             linmap_image, linmap_preimage)
from carriers_windowed import (BandedCausalEndo, BandedEndo, DirectSumCarrier, ProfiniteCarrier, banded_image,
                               causal_preimage)
from core import PreconditionError, ValidationError, log
from dynamics import (DEFAULT_CLOSURE_DEPTH, DEFAULT_CONFIRM_WINDOW, DEFAULT_N_MAX, DEFAULT_VALIDATION_SAMPLES,
                      NON_INERT, Flow, classify_element, entropy_sup, trajectory_prefix, validate_flow)

IMAGE = 'image'
PREIMAGE = 'preimage'
ACCUMULATE = 'accumulate'
MEET_PREIMAGE = 'meet_preimage'


@dataclass(frozen=True)
class DirectSum:
    """Countable direct sum of Z/m (of GF(p) when field is set), discrete"""
    modulus: int
    field: bool = False


@dataclass(frozen=True)
class ProfiniteProduct:
    """Countable product of Z/m (of GF(p) when field is set), compact"""
    modulus: int
    field: bool = False


class FunctorKind(Enum):
    S_VEE = 'S_vee'
    S_WEDGE = 'S_wedge'
    CO_VEE = 'CO_vee'
    CO_WEDGE = 'CO_wedge'
    LCO_VEE = 'LCO_vee'
    LCO_WEDGE = 'LCO_wedge'
    I_VEE = 'I_vee'
    I_WEDGE = 'I_wedge'

    @property
    def join_side(self):
        return self.value.endswith('vee')

    @property
    def rule(self):
        return _RULES[self]

    @property
    def restricted(self):
        return self in (FunctorKind.I_VEE, FunctorKind.I_WEDGE)


_RULES = {
    FunctorKind.S_VEE: IMAGE,
    FunctorKind.I_VEE: IMAGE,
    FunctorKind.S_WEDGE: PREIMAGE,
    FunctorKind.I_WEDGE: PREIMAGE,
    FunctorKind.CO_VEE: ACCUMULATE,
    FunctorKind.LCO_VEE: ACCUMULATE,
    FunctorKind.CO_WEDGE: MEET_PREIMAGE,
    FunctorKind.LCO_WEDGE: MEET_PREIMAGE,
}

# object families each kind accepts; None means either mode, True field only, False group only
_FAMILIES = {
    FunctorKind.S_VEE: {FiniteAbelianGroup: None, VectorSpace: None, DirectSum: None},
    FunctorKind.I_VEE: {FiniteAbelianGroup: None, VectorSpace: None, DirectSum: None},
    FunctorKind.S_WEDGE: {FiniteAbelianGroup: None, VectorSpace: None, ProfiniteProduct: None},
    FunctorKind.I_WEDGE: {FiniteAbelianGroup: None, VectorSpace: None, ProfiniteProduct: None},
    FunctorKind.CO_VEE: {FiniteAbelianGroup: None, DirectSum: False},
    FunctorKind.CO_WEDGE: {FiniteAbelianGroup: None, ProfiniteProduct: False},
    FunctorKind.LCO_VEE: {VectorSpace: None, DirectSum: True},
    FunctorKind.LCO_WEDGE: {VectorSpace: None, ProfiniteProduct: True},
}


class NamedEntropy(Enum):
    ENT_TILDE = 'ent_tilde'
    ENT_TILDE_STAR = 'ent_tilde_star'
    H_ALG = 'h_alg'
    H_TOP = 'h_top'
    ENT_LLC = 'ent_llc'
    ENT_STAR_LLC = 'ent_star_llc'

    @property
    def kind(self):
        return BINDINGS[self][0]

    @property
    def restricted_kind(self):
        return BINDINGS[self][1]


BINDINGS = {
    NamedEntropy.ENT_TILDE: (FunctorKind.S_VEE, FunctorKind.I_VEE),
    NamedEntropy.ENT_TILDE_STAR: (FunctorKind.S_WEDGE, FunctorKind.I_WEDGE),
    NamedEntropy.H_ALG: (FunctorKind.CO_VEE, FunctorKind.CO_VEE),
    NamedEntropy.H_TOP: (FunctorKind.CO_WEDGE, FunctorKind.CO_WEDGE),
    NamedEntropy.ENT_LLC: (FunctorKind.LCO_VEE, FunctorKind.LCO_VEE),
    NamedEntropy.ENT_STAR_LLC: (FunctorKind.LCO_WEDGE, FunctorKind.LCO_WEDGE),
}


@lru_cache(maxsize=None)
def carrier_for(obj, join_side):
    """One shared carrier per (object, side) so flows built from one object compose"""
    if isinstance(obj, FiniteAbelianGroup):
        return SubgroupJoinCarrier(obj) if join_side else SubgroupMeetCarrier(obj)
    if isinstance(obj, VectorSpace):
        return SubspaceJoinCarrier(obj) if join_side else SubspaceMeetCarrier(obj)
    if isinstance(obj, DirectSum):
        return DirectSumCarrier(obj.modulus, obj.field)
    if isinstance(obj, ProfiniteProduct):
        return ProfiniteCarrier(obj.modulus, obj.field)
    raise ValidationError(f"no carrier for object {obj!r}")


def _check_family(kind, obj):
    families = _FAMILIES[kind]
    mode = families.get(type(obj), 'missing')
    if mode == 'missing':
        raise ValidationError(f"{kind.value} does not apply to {type(obj).__name__}")
    if mode is not None and obj.field != mode:
        wanted = 'a field' if mode else 'a group'
        raise ValidationError(f"{kind.value} needs {wanted} object, got {obj!r}")


def _admit_endo(obj, endo):
    if isinstance(obj, FiniteAbelianGroup):
        if not isinstance(endo, AbEndo) or endo.group != obj:
            raise ValidationError(f"expected an endomorphism of {obj.moduli}")
        return endo
    if isinstance(obj, VectorSpace):
        if not isinstance(endo, LinMap) or endo.space != obj:
            raise ValidationError(f"expected a linear map of GF({obj.p})^{obj.n}")
        return endo
    if not isinstance(endo, BandedEndo) or endo.modulus != obj.modulus:
        raise ValidationError(f"expected a banded endomorphism over modulus {obj.modulus}")
    if isinstance(obj, ProfiniteProduct) and not isinstance(endo, BandedCausalEndo):
        if endo.start < 0:
            raise ValidationError(f"non-causal band (start {endo.start}) on a product", witness=endo)
        return BandedCausalEndo(endo.modulus, endo.coeffs, endo.start)
    return endo


def image_map(obj, endo):
    if isinstance(obj, FiniteAbelianGroup):
        return lambda H: endo_image(endo, H)
    if isinstance(obj, VectorSpace):
        return lambda H: linmap_image(endo, H)
    if isinstance(obj, DirectSum):
        return lambda x: banded_image(endo, x)
    raise ValidationError(f"images are not carried by {type(obj).__name__}")


def preimage_map(obj, endo):
    if isinstance(obj, FiniteAbelianGroup):
        return lambda H: endo_preimage(endo, H)
    if isinstance(obj, VectorSpace):
        return lambda H: linmap_preimage(endo, H)
    if isinstance(obj, ProfiniteProduct):
        return lambda U: causal_preimage(endo, U)
    raise ValidationError(f"preimages are not carried by {type(obj).__name__}")


def describe_endo(endo):
    if isinstance(endo, BandedEndo):
        return {'start': endo.start, 'coeffs': list(endo.coeffs)}
    return {'matrix': [list(r) for r in endo.matrix]}


def endo_label(endo):
    if isinstance(endo, BandedEndo):
        return f"band(start={endo.start}, coeffs={list(endo.coeffs)})"
    return f"matrix{[list(r) for r in endo.matrix]}"


class LiftedFlow(Flow):
    """Flow obtained by lifting an endomorphism through a functor kind"""

    def __init__(self, kind, obj, base_endo, carrier, lifted, name):
        super().__init__(carrier, lifted, name)
        self.kind = kind
        self.obj = obj
        self.base_endo = base_endo


def build_flow(kind, obj, endo, samples=DEFAULT_VALIDATION_SAMPLES, seed=0):
    """
    Flow of the lifted map on the semilattice the kind assigns to obj

    Args:
        kind: FunctorKind or its string value
        obj: FiniteAbelianGroup, VectorSpace, DirectSum or ProfiniteProduct
        endo: AbEndo, LinMap, BandedEndo or BandedCausalEndo matching obj
        samples: sample pairs for the homomorphism and contractivity checks
        seed: sampling seed

    Raises:
        ValidationError: the object, endomorphism or lifted map is not admissible
    """
    kind = FunctorKind(kind)
    _check_family(kind, obj)
    endo = _admit_endo(obj, endo)
    S = carrier_for(obj, kind.join_side)
    if kind.rule == IMAGE:
        lifted = image_map(obj, endo)
    elif kind.rule == PREIMAGE:
        lifted = preimage_map(obj, endo)
    elif kind.rule == ACCUMULATE:
        image = image_map(obj, endo)
        lifted = lambda U: S.join(U, image(U))
    else:
        preimage = preimage_map(obj, endo)
        lifted = lambda U: S.join(U, preimage(U))
    flow = LiftedFlow(kind, obj, endo, S, lifted, f"{kind.value}[{endo_label(endo)}]")
    validate_flow(flow, samples, seed)
    log('FUNCTORS', f"built {flow.name} on {S.name}")
    return flow


def named_entropy(which, obj, endo, probes, closure_depth=DEFAULT_CLOSURE_DEPTH, n_max=DEFAULT_N_MAX,
                  confirm_window=DEFAULT_CONFIRM_WINDOW, restricted=False, workers=None):
    """Probe lower bound for one of the named entropies of endo"""
    which = NamedEntropy(which)
    kind = which.restricted_kind if restricted else which.kind
    flow = build_flow(kind, obj, endo)
    if kind.restricted:
        probes = [p for p in probes if classify_element(flow, p) != NON_INERT]
        if not probes:
            raise PreconditionError(f"no probe is inert for {flow.name}")
    return entropy_sup(flow, probes, closure_depth, n_max, confirm_window, workers)


@dataclass
class IdentityReport:
    name: str
    checked: int
    mismatches: list

    @property
    def ok(self):
        return not self.mismatches

    def to_json(self, carrier):
        return {'identity': self.name, 'checked': self.checked, 'ok': self.ok,
                'mismatches': [{'probe': carrier.to_json(m['probe']), 'n': m['n']} for m in self.mismatches]}


def direct_accumulation(flow, U, n):
    """[0, U, U + f(U), ...] (or U meet f^-1(U) meet ... on the meet side), built without the lifted map"""
    S = flow.carrier
    step = image_map(flow.obj, flow.base_endo) if flow.kind.join_side else preimage_map(flow.obj, flow.base_endo)
    out = [S.bottom]
    acc = power = S.canonical(U)
    for j in range(n):
        if j > 0:
            power = step(power)
            acc = S.join(acc, power)
        out.append(acc)
    return out


def check_trajectory_identity(flow, probes, n):
    """T_j of the lifted map against the directly accumulated sums or intersections, j <= n"""
    mismatches, checked = [], 0
    for U in probes:
        lifted = trajectory_prefix(flow, U, n)
        direct = direct_accumulation(flow, U, n)
        for j in range(1, n + 1):
            checked += 1
            if lifted[j] != direct[j]:
                mismatches.append({'probe': U, 'n': j})
    return IdentityReport('trajectory', checked, mismatches)


def adjoint_step_identity(group, endo, probes, n):
    """
    Per-step duality on a finite abelian group: along both lifted trajectories the
    meet-side distance d*(T_j, T_j+1) equals the join-side d(T_j+1, T_j)
    """
    vee = build_flow(FunctorKind.S_VEE, group, endo)
    wedge = build_flow(FunctorKind.S_WEDGE, group, endo)
    mismatches, checked = [], 0
    for U in probes:
        for flow, other in ((vee, wedge.carrier), (wedge, vee.carrier)):
            T = trajectory_prefix(flow, U, n + 1)
            for j in range(1, n + 1):
                checked += 1
                if flow.carrier.dist(T[j], T[j + 1]) != other.dist(T[j + 1], T[j]):
                    mismatches.append({'probe': U, 'n': j})
    return IdentityReport('adjoint_step', checked, mismatches)
