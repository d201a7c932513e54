"""Tests for the lifting functors and the named entropies"""
import pytest

from carriers_finite import AbEndo, FiniteAbelianGroup, LinMap, VectorSpace
from carriers_windowed import BandedCausalEndo, BandedEndo, unit_window, zero_cylinder
from core import ExtDist, Rate, ValidationError
from dynamics import entropy_at
from functors import (DirectSum, FunctorKind, NamedEntropy, ProfiniteProduct, adjoint_step_identity, build_flow,
                      carrier_for, check_trajectory_identity, describe_endo, endo_label, named_entropy)

G42 = FiniteAbelianGroup((4, 2))
DOUBLING = AbEndo(G42, ((2, 0), (0, 0)))
MIXING = AbEndo(G42, ((1, 2), (1, 1)))


class TestFunctorKinds:
    def test_sides_and_rules(self):
        assert FunctorKind.S_VEE.join_side
        assert not FunctorKind.CO_WEDGE.join_side
        assert FunctorKind('I_wedge').restricted
        assert not FunctorKind.LCO_VEE.restricted

    def test_bindings(self):
        assert NamedEntropy.H_ALG.kind == FunctorKind.CO_VEE
        assert NamedEntropy.ENT_TILDE.restricted_kind == FunctorKind.I_VEE
        assert NamedEntropy('ent_star_llc').kind == FunctorKind.LCO_WEDGE


class TestBuildFlow:
    def test_shared_carrier(self):
        a = build_flow(FunctorKind.S_VEE, G42, DOUBLING)
        b = build_flow('S_vee', G42, MIXING)
        assert a.carrier is b.carrier
        assert carrier_for(G42, False) is build_flow(FunctorKind.S_WEDGE, G42, DOUBLING).carrier
        assert a.carrier is not carrier_for(G42, False)

    def test_image_and_preimage_lifts(self):
        vee = build_flow(FunctorKind.S_VEE, G42, DOUBLING)
        wedge = build_flow(FunctorKind.S_WEDGE, G42, DOUBLING)
        whole = carrier_for(G42, False).bottom
        assert vee(whole).order == 2
        assert wedge(vee.carrier.bottom).order == 4

    def test_accumulating_lift(self):
        flow = build_flow(FunctorKind.CO_VEE, DirectSum(2), BandedEndo.shift(2))
        assert flow(unit_window(2, [0])) == unit_window(2, [0, 1])

    def test_meet_preimage_lift(self):
        flow = build_flow(FunctorKind.CO_WEDGE, ProfiniteProduct(2), BandedEndo.shift(2))
        assert flow(zero_cylinder(2, 1)) == zero_cylinder(2, 2)

    def test_band_becomes_causal_on_products(self):
        flow = build_flow(FunctorKind.S_WEDGE, ProfiniteProduct(3), BandedEndo.shift(3))
        assert isinstance(flow.base_endo, BandedCausalEndo)

    def test_non_causal_band_rejected(self):
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.S_WEDGE, ProfiniteProduct(2), BandedEndo.shift(2, -1))

    def test_family_checks(self):
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.CO_VEE, DirectSum(2, field=True), BandedEndo.shift(2))
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.LCO_VEE, DirectSum(2), BandedEndo.shift(2))
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.S_VEE, ProfiniteProduct(2), BandedEndo.shift(2))
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.S_WEDGE, DirectSum(2), BandedEndo.shift(2))

    def test_endo_must_match_object(self):
        other = FiniteAbelianGroup((2,))
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.S_VEE, G42, AbEndo.identity(other))
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.S_VEE, DirectSum(3), BandedEndo.shift(2))
        with pytest.raises(ValidationError):
            build_flow(FunctorKind.S_VEE, VectorSpace(2, 2), DOUBLING)

    def test_labels(self):
        assert describe_endo(BandedEndo.shift(2)) == {'start': 1, 'coeffs': [1]}
        assert describe_endo(DOUBLING) == {'matrix': [[2, 0], [0, 0]]}
        assert endo_label(BandedEndo.shift(2)) == 'band(start=1, coeffs=[1])'


class TestNamedEntropies:
    def test_algebraic_entropy_of_shift(self):
        report = named_entropy('h_alg', DirectSum(2), BandedEndo.shift(2), [unit_window(2, [0])])
        assert report.value == Rate(ExtDist.log(2))
        assert report.exact

    @pytest.mark.parametrize('m', [2, 3, 4, 6])
    def test_shift_entropy_is_log_of_modulus(self, m):
        flow = build_flow(FunctorKind.S_VEE, DirectSum(m), BandedEndo.shift(m))
        report = entropy_at(flow, unit_window(m, [0]))
        assert report.value == Rate(ExtDist.log(m))
        assert report.exact
        assert report.n_used <= 16
        named = named_entropy('h_alg', DirectSum(m), BandedEndo.shift(m), [unit_window(m, [0])])
        assert named.value == Rate(ExtDist.log(m))

    @pytest.mark.parametrize('p', [2, 3, 5])
    def test_topological_entropy_of_shift(self, p):
        report = named_entropy(NamedEntropy.H_TOP, ProfiniteProduct(p), BandedEndo.shift(p), [zero_cylinder(p, 1)])
        assert report.value == Rate(ExtDist.log(p))

    def test_intrinsic_entropy_of_shift(self):
        report = named_entropy('ent_tilde', DirectSum(3), BandedEndo.shift(3), [unit_window(3, [0])])
        assert report.value == Rate(ExtDist.log(3))

    def test_dual_intrinsic_entropy_of_shift(self):
        report = named_entropy('ent_tilde_star', ProfiniteProduct(2), BandedEndo.shift(2), [zero_cylinder(2, 1)])
        assert report.value == Rate(ExtDist.log(2))

    def test_linearly_compact_entropies(self):
        field_sum = DirectSum(2, field=True)
        report = named_entropy('ent_llc', field_sum, BandedEndo.shift(2), [unit_window(2, [0], field=True)])
        assert report.value == Rate(ExtDist.dim(1))
        product = ProfiniteProduct(3, field=True)
        report = named_entropy('ent_star_llc', product, BandedEndo.shift(3), [zero_cylinder(3, 1, field=True)])
        assert report.value == Rate(ExtDist.dim(1))

    def test_restricted_variant_matches_on_inert_probes(self):
        probes = [unit_window(2, [0]), unit_window(2, [0, 3])]
        full = named_entropy('ent_tilde', DirectSum(2), BandedEndo.shift(2), probes)
        restricted = named_entropy('ent_tilde', DirectSum(2), BandedEndo.shift(2), probes, restricted=True)
        assert full.value == restricted.value

    def test_finite_group_entropies_vanish(self):
        S = carrier_for(G42, True)
        for which in ('ent_tilde', 'h_alg'):
            assert named_entropy(which, G42, MIXING, S.elements()).value.is_zero

    def test_linear_map_on_finite_space(self):
        V = VectorSpace(3, 2)
        f = LinMap(V, ((0, 1), (0, 0)))
        flow = build_flow(FunctorKind.LCO_VEE, V, f)
        for H in flow.carrier.elements():
            assert entropy_at(flow, H).value.is_zero


class TestIdentities:
    @pytest.mark.parametrize('kind', [FunctorKind.S_VEE, FunctorKind.S_WEDGE, FunctorKind.CO_VEE,
                                      FunctorKind.CO_WEDGE])
    def test_trajectory_identity_on_finite_group(self, kind):
        flow = build_flow(kind, G42, MIXING)
        report = check_trajectory_identity(flow, flow.carrier.elements(), 6)
        assert report.ok, report.to_json(flow.carrier)
        assert report.checked == 8 * 6

    def test_trajectory_identity_on_direct_sum(self):
        flow = build_flow(FunctorKind.S_VEE, DirectSum(2), BandedEndo(2, (1, 1)))
        S = flow.carrier
        assert check_trajectory_identity(flow, [S.units(0), S.units(0, 2)], 8).ok

    def test_trajectory_identity_on_product(self):
        flow = build_flow(FunctorKind.S_WEDGE, ProfiniteProduct(2), BandedEndo.shift(2))
        assert check_trajectory_identity(flow, [zero_cylinder(2, 1), zero_cylinder(2, 2)], 6).ok

    @pytest.mark.parametrize('endo', [DOUBLING, MIXING, AbEndo.identity(G42)])
    def test_adjoint_step_identity(self, endo):
        probes = carrier_for(G42, True).elements()
        report = adjoint_step_identity(G42, endo, probes, 5)
        assert report.ok
        assert report.to_json(carrier_for(G42, True))['identity'] == 'adjoint_step'
