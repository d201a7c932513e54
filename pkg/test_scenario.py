"""Tests for scenario parsing and validation"""
import pytest

from carriers_finite import AbEndo, FiniteAbelianGroup, LinMap
from carriers_windowed import BandedCausalEndo, BandedEndo, DirectSumCarrier, ProfiniteCarrier
from core import ScenarioError
from functors import DirectSum, FunctorKind, NamedEntropy
from scenario import CONFIG_DEFAULTS, SCHEMA_VERSION, parse_scenario


def doc(**fields):
    base = {'schema_version': SCHEMA_VERSION, 'carrier': {'family': 'direct_sum', 'modulus': 2}}
    base.update(fields)
    return base


class TestObjects:
    def test_direct_sum(self):
        s = parse_scenario(doc())
        assert s.obj == DirectSum(2)
        assert isinstance(s.carrier, DirectSumCarrier)
        assert s.kind == FunctorKind.S_VEE
        assert s.config == CONFIG_DEFAULTS

    def test_profinite_field(self):
        s = parse_scenario(doc(carrier={'family': 'profinite', 'modulus': 5, 'field': True}))
        assert isinstance(s.carrier, ProfiniteCarrier)
        assert s.carrier.field
        assert s.kind == FunctorKind.S_WEDGE

    def test_field_needs_prime(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(carrier={'family': 'direct_sum', 'modulus': 6, 'field': True}))
        assert e.value.path == '/carrier'

    def test_unknown_family(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(carrier={'family': 'torus'}))
        assert e.value.path == '/carrier/family'

    def test_family_fields_checked(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(carrier={'family': 'subgroup_vee', 'modulus': 4}))
        assert e.value.path == '/carrier/modulus'


class TestEndomorphisms:
    def test_band_on_profinite_is_causal(self):
        s = parse_scenario(doc(carrier={'family': 'profinite', 'modulus': 2},
                               endomorphism={'type': 'band', 'coeffs': [1, 1]}))
        assert s.endo == BandedCausalEndo(2, (1, 1), 0)

    def test_band_on_direct_sum(self):
        s = parse_scenario(doc(endomorphism={'type': 'band', 'coeffs': [0, 1], 'start': -2}))
        assert s.endo == BandedEndo(2, (1,), -1)

    def test_matrix_on_group(self):
        s = parse_scenario(doc(carrier={'family': 'subgroup_wedge', 'moduli': [4, 2]},
                               endomorphism={'type': 'matrix', 'rows': [[2, 0], [0, 0]]}))
        assert s.endo == AbEndo(FiniteAbelianGroup((4, 2)), ((2, 0), (0, 0)))

    def test_identity_on_space(self):
        s = parse_scenario(doc(carrier={'family': 'subspace_vee', 'p': 2, 'n': 3},
                               endomorphism={'type': 'identity'}))
        assert isinstance(s.endo, LinMap)

    def test_matrix_on_direct_sum_rejected(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(endomorphism={'type': 'matrix', 'rows': [[1]]}))
        assert e.value.path == '/endomorphism/type'

    def test_bad_coefficient(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(endomorphism={'type': 'band', 'coeffs': [1, 'x']}))
        assert e.value.path == '/endomorphism/coeffs/1'


class TestProbes:
    def test_windows(self):
        s = parse_scenario(doc(probes={'type': 'windows', 'items': [{'offset': 2, 'generators': [[1, 0, 1]]}]}))
        assert s.probes == [s.carrier.element(2, [[1, 0, 1]])]

    def test_generators(self):
        s = parse_scenario(doc(carrier={'family': 'subgroup_vee', 'moduli': [4, 2]},
                               probes={'type': 'generators', 'items': [[[2, 0]], []]}))
        assert [p.order for p in s.probes] == [2, 1]

    def test_sampled_probes_follow_the_seed(self):
        document = doc(probes={'type': 'sampled', 'count': 5})
        assert parse_scenario(document, {'seed': 9}).probes == parse_scenario(document, {'seed': 9}).probes

    def test_standard_probes(self):
        s = parse_scenario(doc(probes={'type': 'standard', 'count': 3, 'window': 3}))
        assert s.probes == [s.carrier.units(0), s.carrier.units(0, 1), s.carrier.units(0, 1, 2)]

    def test_cylinders_need_profinite(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(probes={'type': 'cylinders', 'items': [{'depth': 1, 'generators': []}]}))
        assert e.value.path == '/probes/type'

    def test_empty_item_list(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(probes={'type': 'windows', 'items': []}))
        assert e.value.path == '/probes/items'


class TestFunctorAndConfig:
    def test_named_entropy(self):
        s = parse_scenario(doc(functor={'named': 'h_alg'}))
        assert s.named == NamedEntropy.H_ALG
        assert s.kind == FunctorKind.CO_VEE

    def test_restricted_named_entropy(self):
        s = parse_scenario(doc(functor={'named': 'ent_tilde', 'restricted': True}))
        assert s.kind == FunctorKind.I_VEE

    def test_kind_and_named_are_exclusive(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(functor={'kind': 'S_vee', 'named': 'h_alg'}))
        assert e.value.path == '/functor'

    def test_unknown_kind(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(functor={'kind': 'S_sideways'}))
        assert e.value.path == '/functor/kind'

    def test_precedence(self):
        s = parse_scenario(doc(config={'n_max': 64, 'seed': 4}), {'n_max': 32, 'seed': None})
        assert s.config['n_max'] == 32
        assert s.config['seed'] == 4

    def test_log_base(self):
        s = parse_scenario(doc(carrier={'family': 'direct_sum', 'modulus': 3}, config={'log_base': 'p'}))
        assert s.log_base() == (3, '3')
        assert parse_scenario(doc()).log_base() == (None, 'e')

    def test_log_base_p_needs_a_single_modulus(self):
        mixed = doc(carrier={'family': 'subgroup_vee', 'moduli': [4, 2]}, config={'log_base': 'p'})
        with pytest.raises(ScenarioError) as e:
            parse_scenario(mixed)
        assert e.value.path == '/config/log_base'
        with pytest.raises(ScenarioError):
            parse_scenario(doc(carrier={'family': 'subgroup_vee', 'moduli': [4, 2]}), {'log_base': 'p'})
        uniform = parse_scenario(doc(carrier={'family': 'subgroup_vee', 'moduli': [3, 3]}, config={'log_base': 'p'}))
        assert uniform.log_base() == (3, '3')

    def test_bad_ks(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(config={'ks': [2, 0]}))
        assert e.value.path == '/config/ks/1'

    def test_unknown_config_key(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(config={'threads': 4}))
        assert e.value.path == '/config/threads'

    def test_omega_requires_entries(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(omega=[]))
        assert e.value.path == '/omega'

    def test_conjugacy_needs_endomorphism(self):
        with pytest.raises(ScenarioError) as e:
            parse_scenario(doc(conjugacy={'type': 'affine', 'sign': 1}))
        assert e.value.path == '/endomorphism'
