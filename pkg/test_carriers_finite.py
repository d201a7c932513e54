"""Tests for subgroup and subspace carriers of finite objects"""
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from carriers_finite import (AbEndo, FiniteAbelianGroup, LinMap, SubgroupJoinCarrier, SubgroupMeetCarrier,
                             SubspaceJoinCarrier, SubspaceMeetCarrier, VectorSpace, dist_vee, dist_vee_dim,
                             dist_wedge, dist_wedge_dim, endo_image, endo_preimage, enumerate_endomorphisms,
                             enumerate_linmaps, enumerate_subgroups, enumerate_subspaces, linmap_image,
                             linmap_preimage, subgroup_canonicalize, subgroup_join, subgroup_meet,
                             subspace_canonicalize, trivial_subgroup, whole_group)
from core import DIM, BudgetError, CarrierMismatchError, ExtDist, Rate, ValidationError, check_axioms_exhaustive
from dynamics import FEKETE_CAPPED, Flow, entropy_at

G42 = FiniteAbelianGroup((4, 2))
F2_3 = VectorSpace(2, 3)


class UnorderedSubgroupCarrier(SubgroupJoinCarrier):
    """Subgroup carrier that refuses the exact stopping route"""
    well_ordered_values = False


def sub(*gens):
    return subgroup_canonicalize(G42, list(gens))


def span(*vectors):
    return subspace_canonicalize(F2_3, list(vectors))


class TestFiniteAbelianGroup:
    def test_order_and_rank(self):
        assert G42.order == 8
        assert G42.rank == 2
        assert len(list(G42.elements())) == 8

    def test_invalid_moduli(self):
        with pytest.raises(ValidationError):
            FiniteAbelianGroup((1, 4))
        with pytest.raises(ValidationError):
            FiniteAbelianGroup(())


class TestSubgroupCanonicalize:
    def test_empty_generators_give_trivial(self):
        H = sub()
        assert H.order == 1
        assert H == trivial_subgroup(G42)

    def test_duplicate_generators(self):
        assert sub((2, 0), (2, 0)).order == 2

    def test_spanning_generators(self):
        assert sub((1, 0), (0, 1)) == whole_group(G42)
        assert whole_group(G42).order == 8

    def test_unique_form(self):
        assert sub((1, 1)) == sub((3, 1))
        assert sub((2, 0), (0, 1)) == sub((2, 1), (0, 1))

    def test_wrong_length(self):
        with pytest.raises(ValidationError):
            subgroup_canonicalize(G42, [(1, 0, 0)])

    def test_membership(self):
        H = sub((2, 1))
        assert H.contains((2, 1))
        assert H.contains((0, 0))
        assert not H.contains((2, 0))


class TestDistances:
    def test_dist_vee(self):
        assert dist_vee(G42, sub((2, 0)), sub((0, 1))) == ExtDist.log(2)
        assert dist_vee(G42, sub((2, 0)), sub((2, 0))).is_zero
        assert dist_vee(G42, trivial_subgroup(G42), whole_group(G42)) == ExtDist.log(8)

    def test_dist_wedge(self):
        assert dist_wedge(G42, sub((1, 0)), sub((0, 1))) == ExtDist.log(4)
        assert dist_wedge(G42, sub((1, 0)), sub((1, 0))).is_zero

    def test_duality(self):
        subs = enumerate_subgroups(G42)
        for H, K in itertools.product(subs, repeat=2):
            assert dist_wedge(G42, H, K) == dist_vee(G42, K, H)

    def test_join_meet_orders(self):
        subs = enumerate_subgroups(G42)
        for H, K in itertools.product(subs, repeat=2):
            assert subgroup_join(G42, H, K).order * subgroup_meet(G42, H, K).order == H.order * K.order

    def test_zero_iff_contained(self):
        subs = enumerate_subgroups(G42)
        for H, K in itertools.product(subs, repeat=2):
            contained = all(H.contains(g) for g in K.generators().T)
            assert dist_vee(G42, H, K).is_zero == contained

    def test_group_mismatch(self):
        other = FiniteAbelianGroup((3,))
        with pytest.raises(CarrierMismatchError):
            dist_vee(G42, sub((2, 0)), subgroup_canonicalize(other, [(1,)]))


class TestEndomorphisms:
    def test_well_definedness(self):
        with pytest.raises(ValidationError):
            # e_1 has order 2 but its image (1, 1) has order 4
            AbEndo(G42, ((1, 1), (0, 1)))

    def test_identity(self):
        f = AbEndo.identity(G42)
        for H in enumerate_subgroups(G42):
            assert endo_image(f, H) == H
            assert endo_preimage(f, H) == H

    def test_doubling(self):
        f = AbEndo(G42, ((2, 0), (0, 0)))
        assert endo_image(f, whole_group(G42)) == sub((2, 0))
        kernel = endo_preimage(f, trivial_subgroup(G42))
        assert kernel == sub((2, 0), (0, 1))
        assert kernel.order == 4

    def test_compose_and_power(self):
        f = AbEndo(G42, ((2, 0), (0, 0)))
        assert f.power(2).matrix == ((0, 0), (0, 0))
        assert f.apply((1, 1)) == (2, 0)

    def test_endomorphism_count(self):
        assert len(enumerate_endomorphisms(G42)) == 32

    def test_2g_is_fully_invariant(self):
        twoG = sub((2, 0))
        for f in enumerate_endomorphisms(G42):
            assert subgroup_join(G42, twoG, endo_image(f, twoG)) == twoG


class TestEnumeration:
    def test_counts(self):
        assert len(enumerate_subgroups(FiniteAbelianGroup((2,)))) == 2
        assert len(enumerate_subgroups(G42)) == 8
        for p in (3, 5, 7):
            assert len(enumerate_subgroups(FiniteAbelianGroup((p,)))) == 2

    def test_budget(self):
        with pytest.raises(BudgetError):
            enumerate_subgroups(FiniteAbelianGroup((64, 64, 2)), budget=4096)

    def test_subspace_count(self):
        assert len(enumerate_subspaces(F2_3)) == 16

    def test_linear_maps(self):
        V = VectorSpace(2, 2)
        maps = enumerate_linmaps(V)
        assert len(maps) == len(set(maps)) == 16
        assert LinMap.identity(V) in maps
        with pytest.raises(BudgetError):
            enumerate_linmaps(VectorSpace(3, 3))


class TestSubspaces:
    def test_distances(self):
        assert dist_vee_dim(F2_3, span((1, 0, 0)), span((1, 1, 0))) == ExtDist.dim(1)
        assert dist_wedge_dim(F2_3, span((1, 0, 0), (0, 1, 0)), span((0, 1, 0), (0, 0, 1))) == ExtDist.dim(1)
        assert dist_vee_dim(F2_3, span((1, 0, 0)), span((1, 0, 0))) == ExtDist.dim(0)

    def test_canonical_form(self):
        assert span((1, 1, 0), (0, 1, 0)) == span((1, 0, 0), (0, 1, 0))
        assert span((1, 1, 0), (1, 1, 0)).dim == 1

    def test_linmap_image_and_preimage(self):
        shift = LinMap(F2_3, ((0, 1, 0), (0, 0, 1), (0, 0, 0)))
        assert linmap_image(shift, span((0, 1, 0))) == span((1, 0, 0))
        assert linmap_preimage(shift, span((1, 0, 0))) == span((1, 0, 0), (0, 1, 0))

    def test_identity(self):
        f = LinMap.identity(F2_3)
        for H in enumerate_subspaces(F2_3):
            assert linmap_image(f, H) == H
            assert linmap_preimage(f, H) == H


class TestCarriers:
    @pytest.mark.parametrize('carrier', [SubgroupJoinCarrier(G42), SubgroupMeetCarrier(G42),
                                         SubgroupJoinCarrier(FiniteAbelianGroup((3, 3)))])
    def test_group_carriers_pass_exhaustive_audit(self, carrier):
        report = check_axioms_exhaustive(carrier, carrier.elements())
        assert report.ok, report.to_json(carrier)

    @pytest.mark.parametrize('carrier', [SubspaceJoinCarrier(F2_3), SubspaceMeetCarrier(F2_3)])
    def test_subspace_carriers_pass_exhaustive_audit(self, carrier):
        assert check_axioms_exhaustive(carrier, carrier.elements()).ok

    def test_bottoms(self):
        assert SubgroupJoinCarrier(G42).bottom.order == 1
        assert SubgroupMeetCarrier(G42).bottom.order == 8
        assert SubspaceJoinCarrier(F2_3).bottom.dim == 0
        assert SubspaceMeetCarrier(F2_3).bottom.dim == 3

    def test_invariant_hook(self):
        S = SubgroupJoinCarrier(G42, invariant=lambda index: ExtDist.dim(index.bit_length() - 1))
        assert S.dist(sub((2, 0)), whole_group(G42)) == ExtDist.dim(2)
        assert S.unit == DIM
        assert S.describe()['unit'] == DIM

    def test_invariant_unit_on_the_fekete_route(self):
        G = FiniteAbelianGroup((2, 2, 2))
        S = UnorderedSubgroupCarrier(G, invariant=lambda index: ExtDist.dim(index.bit_length() - 1))
        cycle = AbEndo(G, ((0, 0, 1), (1, 0, 0), (0, 1, 0)))
        flow = Flow(S, lambda H: endo_image(cycle, H), 'cycle')
        report = entropy_at(flow, subgroup_canonicalize(G, [(1, 0, 0)]), n_max=2)
        assert report.method == FEKETE_CAPPED
        assert report.value == Rate(ExtDist.dim(1))
        assert {c.unit for c in report.c_prefix} == {DIM}

    def test_invariant_must_vanish_on_index_one(self):
        with pytest.raises(ValidationError):
            SubgroupJoinCarrier(G42, invariant=lambda index: ExtDist.dim(index))

    def test_json(self):
        S = SubgroupJoinCarrier(G42)
        doc = S.to_json(sub((2, 0)))
        assert doc['order'] == 2


@settings(deadline=None, max_examples=30)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 1)), max_size=3))
def test_canonicalize_is_idempotent(gens):
    S = SubgroupJoinCarrier(G42)
    H = sub(*gens)
    assert S.canonical(H) == H
    assert S.canonical(S.canonical(H)) == H
