"""Tests for the modular Hermite form and GF(p) row reduction"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import GF, Matrix
from sympy.matrices.normalforms import hermite_normal_form
from sympy.polys.matrices import DomainMatrix

from linalg import (gf_contains, gf_image, gf_meet, gf_nullspace, gf_preimage, gf_rref, hermite_form, inverse_mod,
                    lattice_contains, lattice_generators, lattice_image, lattice_meet, lattice_order,
                    lattice_preimage)


@st.composite
def group_and_generators(draw, max_rank=3, max_modulus=12, max_gens=3):
    moduli = draw(st.lists(st.integers(2, max_modulus), min_size=1, max_size=max_rank))
    count = draw(st.integers(0, max_gens))
    gens = [[draw(st.integers(0, m - 1)) for m in moduli] for _ in range(count)]
    return moduli, gens


def columns(moduli, gens):
    return np.array(gens, dtype=np.int64).T if gens else np.zeros((len(moduli), 0), dtype=np.int64)


def span(moduli, gens):
    """Element set by closure under addition"""
    found = {tuple(0 for _ in moduli)}
    frontier = list(found)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                s = tuple((x + y) % m for x, y, m in zip(a, g, moduli))
                if s not in found:
                    found.add(s)
                    nxt.append(s)
        frontier = nxt
    return found


class TestHermiteForm:
    def test_upper_triangular_and_reduced(self):
        W = hermite_form(np.array([[2, 0], [1, 1]]).T, (4, 2))
        assert W[1, 0] == 0
        for i, m in enumerate((4, 2)):
            assert m % W[i, i] == 0
            assert all(0 <= W[i, j] < W[i, i] for j in range(i + 1, 2))

    def test_trivial_and_whole(self):
        assert lattice_order(hermite_form(np.zeros((2, 0)), (4, 2)), (4, 2)) == 1
        assert lattice_order(hermite_form(np.eye(2, dtype=np.int64), (4, 2)), (4, 2)) == 8

    def test_duplicate_generators(self):
        W = hermite_form(np.array([[2, 0], [2, 0]]).T, (4, 2))
        assert lattice_order(W, (4, 2)) == 2

    @settings(deadline=None, max_examples=60)
    @given(group_and_generators())
    def test_order_matches_enumeration(self, data):
        moduli, gens = data
        W = hermite_form(columns(moduli, gens), moduli)
        assert lattice_order(W, moduli) == len(span(moduli, gens))

    @settings(deadline=None, max_examples=60)
    @given(group_and_generators())
    def test_canonical_for_the_subgroup(self, data):
        moduli, gens = data
        W = hermite_form(columns(moduli, gens), moduli)
        again = hermite_form(lattice_generators(W, moduli), moduli)
        assert np.array_equal(W, again)

    @settings(deadline=None, max_examples=40)
    @given(group_and_generators())
    def test_index_agrees_with_sympy(self, data):
        moduli, gens = data
        W = hermite_form(columns(moduli, gens), moduli)
        lattice = np.hstack([columns(moduli, gens), np.diag(moduli)])
        H = hermite_normal_form(Matrix(lattice.tolist()))
        assert abs(H.det()) == math.prod(int(W[i, i]) for i in range(len(moduli)))
        for j in range(H.shape[1]):
            assert lattice_contains(W, [int(v) for v in H[:, j]], moduli)

    @settings(deadline=None, max_examples=40)
    @given(group_and_generators(max_rank=2, max_modulus=8))
    def test_contains_matches_enumeration(self, data):
        moduli, gens = data
        W = hermite_form(columns(moduli, gens), moduli)
        members = span(moduli, gens)
        for v in np.ndindex(*moduli):
            assert lattice_contains(W, v, moduli) == (tuple(v) in members)


class TestLatticeOperations:
    @settings(deadline=None, max_examples=40)
    @given(group_and_generators(max_rank=2, max_modulus=8), st.data())
    def test_meet_matches_intersection(self, data, draw):
        moduli, gens = data
        other = [[draw.draw(st.integers(0, m - 1)) for m in moduli] for _ in range(2)]
        W1 = hermite_form(columns(moduli, gens), moduli)
        W2 = hermite_form(columns(moduli, other), moduli)
        M = lattice_meet(W1, W2, moduli)
        assert lattice_order(M, moduli) == len(span(moduli, gens) & span(moduli, other))

    def test_preimage_of_shift_like_map(self):
        # x -> 2x on Z/4; preimage of {0} is {0, 2}
        W0 = hermite_form(np.zeros((1, 0)), (4,))
        P = lattice_preimage(np.array([[2]]), W0, (4,), (4,))
        assert lattice_order(P, (4,)) == 2
        assert lattice_contains(P, [2], (4,))

    def test_image(self):
        W = hermite_form(np.eye(2, dtype=np.int64), (4, 2))
        A = np.array([[2, 0], [0, 0]])
        assert lattice_order(lattice_image(A, W, (4, 2), (4, 2)), (4, 2)) == 2

    def test_preimage_between_different_groups(self):
        # projection Z/4 x Z/2 -> Z/4 onto the first factor; preimage of <2> has order 4
        A = np.array([[1, 0]])
        target = hermite_form(np.array([[2]]), (4,))
        P = lattice_preimage(A, target, (4, 2), (4,))
        assert lattice_order(P, (4, 2)) == 4


class TestPrimeField:
    def test_rref(self):
        R = gf_rref(np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1]]), 2, 3)
        assert R.tolist() == [[1, 0, 1], [0, 1, 1]]

    def test_rref_of_nothing(self):
        assert gf_rref(np.zeros((0, 3)), 3, 3).shape == (0, 3)

    def test_nullspace(self):
        N = gf_nullspace(np.array([[1, 1, 0]]), 2, 3)
        assert N.shape == (2, 3)
        assert not ((N @ np.array([1, 1, 0])) % 2).any()

    def test_meet(self):
        A = np.array([[1, 0, 0], [0, 1, 0]])
        B = np.array([[0, 1, 0], [0, 0, 1]])
        assert gf_meet(A, B, 2, 3).tolist() == [[0, 1, 0]]

    def test_image_and_preimage(self):
        nilpotent = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
        e2 = np.array([[0, 1, 0]])
        assert gf_image(nilpotent, e2, 2, 3).tolist() == [[1, 0, 0]]
        pre = gf_rref(gf_preimage(nilpotent, np.array([[1, 0, 0]]), 2, 3), 2, 3)
        # preimage of span{e0}: x1 free, x2 = 0
        assert pre.tolist() == [[1, 0, 0], [0, 1, 0]]

    def test_contains(self):
        rows = np.array([[1, 2, 0]])
        assert gf_contains(rows, [2, 1, 0], 3)
        assert not gf_contains(rows, [1, 1, 0], 3)

    def test_inverse_mod(self):
        P = np.array([[1, 1], [0, 1]])
        Q = inverse_mod(P, 5)
        assert ((P @ Q) % 5).tolist() == [[1, 0], [0, 1]]
        with pytest.raises(ValueError):
            inverse_mod(np.array([[2, 0], [0, 1]]), 4)

    @settings(deadline=None, max_examples=60)
    @given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 4), st.data())
    def test_rref_agrees_with_sympy(self, p, n, data):
        rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=1, max_size=4))
        R = gf_rref(np.array(rows, dtype=np.int64).reshape(len(rows), n), p, n)
        K = GF(p)
        M = DomainMatrix([[K(v) for v in row] for row in rows], (len(rows), n), K)
        expected, pivots = M.rref()
        expected = [[int(v) % p for v in row] for row in expected.to_Matrix().tolist()][:len(pivots)]
        assert R.tolist() == expected

    def test_rref_result_is_not_shared(self):
        rows = np.array([[1, 2, 0], [0, 1, 1]])
        first = gf_rref(rows, 3, 3)
        first[0, 0] = 2
        assert gf_rref(rows, 3, 3)[0, 0] == 1
        W = hermite_form(np.eye(2, dtype=np.int64), (4, 2))
        W[0, 0] = 3
        assert hermite_form(np.eye(2, dtype=np.int64), (4, 2))[0, 0] == 1
