import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from toruslab.errors import (
    CapExceededError,
    DimensionTooLargeError,
    SingularMatrixError,
    UnknownLatticeError,
)
from toruslab.lattices import (
    IntegerLattice,
    RealLattice,
    dual_cosets,
    enumerate_cosets,
    named_lattice,
    normalize_shape,
    parse_matrix,
    parse_real_matrix,
    shortest_vector,
    smith_normal_form,
)

from conftest import random_invertible


def _matrices(max_r=4, max_entry=50):
    def build(r, flat):
        return [flat[i * r : (i + 1) * r] for i in range(r)]

    return st.integers(1, max_r).flatmap(
        lambda r: st.lists(
            st.integers(-max_entry, max_entry), min_size=r * r, max_size=r * r
        ).map(lambda flat: build(r, flat))
    )


class TestSmithNormalForm:
    def test_diagonal_input(self):
        snf = smith_normal_form(parse_matrix("2,0;0,2"))
        assert snf.d == (2, 2)

    def test_hand_elimination_example(self):
        # gcd of entries 1, det 4
        snf = smith_normal_form(parse_matrix("2,1;0,2"))
        assert snf.d == (1, 4)

    def test_one_by_one(self):
        assert smith_normal_form(parse_matrix("6")).d == (6,)

    @given(_matrices())
    @settings(max_examples=60, deadline=None)
    def test_recomposition_and_invariants(self, rows):
        try:
            L = IntegerLattice.from_rows(rows)
        except SingularMatrixError:
            assume(False)
        snf = smith_normal_form(L)
        u = np.array(snf.u, dtype=object)
        v = np.array(snf.v, dtype=object)
        m = np.array(L.mat, dtype=object)
        d = np.diag(np.array(snf.d, dtype=object))
        assert (u @ m @ v == d).all()
        # unimodular transforms, positive divisor chain, det product
        from toruslab.lattices import _det_int

        assert abs(_det_int(snf.u)) == 1
        assert abs(_det_int(snf.v)) == 1
        assert all(di > 0 for di in snf.d)
        for a, b in zip(snf.d, snf.d[1:]):
            assert b % a == 0
        prod = 1
        for di in snf.d:
            prod *= di
        assert prod == L.det_abs
        # u_inv recomposes mat exactly: mat = u_inv · diag(d) · v_inv
        u_inv = np.array(snf.u_inv, dtype=object)
        assert (u_inv @ u == np.eye(L.r, dtype=object)).all()


class TestCosets:
    def test_identity_trivial(self):
        assert enumerate_cosets(parse_matrix("1,0,0;0,1,0;0,0,1")) == [(0, 0, 0)]

    def test_cyclic(self):
        assert sorted(enumerate_cosets(parse_matrix("3"))) == [(0,), (1,), (2,)]

    def test_pairwise_inequivalent_by_membership_oracle(self):
        L = parse_matrix("2,1;0,2")
        reps = enumerate_cosets(L)
        assert len(reps) == 4
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                diff = tuple(a - b for a, b in zip(reps[i], reps[j]))
                assert not L.contains(diff)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            enumerate_cosets(parse_matrix("100,0;0,100"), cap=9999)

    def test_cap_env_override(self, monkeypatch):
        monkeypatch.setenv("TORUS_MAX_COSETS", "3")
        with pytest.raises(CapExceededError):
            enumerate_cosets(parse_matrix("2,0;0,2"))

    @given(st.integers(2, 3).flatmap(
        lambda r: st.lists(st.integers(-5, 5), min_size=r * r, max_size=r * r).map(
            lambda flat: [flat[i * r : (i + 1) * r] for i in range(r)]
        )
    ))
    @settings(max_examples=40, deadline=None)
    def test_counts_match_det(self, rows):
        try:
            L = IntegerLattice.from_rows(rows)
        except SingularMatrixError:
            assume(False)
        assume(L.det_abs <= 2000)
        reps = enumerate_cosets(L)
        assert len(reps) == L.det_abs
        assert len(dual_cosets(L)) == L.det_abs
        if L.det_abs <= 40:
            for i in range(len(reps)):
                for j in range(i + 1, len(reps)):
                    diff = tuple(a - b for a, b in zip(reps[i], reps[j]))
                    assert not L.contains(diff)


class TestDualCosets:
    def test_identity(self):
        reps = dual_cosets(parse_matrix("1,0;0,1"))
        assert reps[0].coords == (Fraction(0), Fraction(0))
        assert len(reps) == 1

    def test_cyclic_three(self):
        got = sorted(v.coords[0] for v in dual_cosets(parse_matrix("3")))
        assert got == [Fraction(0), Fraction(1, 3), Fraction(2, 3)]

    def test_worked_example(self):
        # image of m = (1, 0) under adj(Λ)ᵀ/det, reduced mod 1
        L = parse_matrix("2,1;0,2")
        adj_t = tuple(zip(*L.adjugate))
        v = tuple(Fraction(adj_t[i][0], L.det) % 1 for i in range(2))
        assert v == (Fraction(1, 2), Fraction(3, 4))
        coords = {d.coords for d in dual_cosets(L)}
        assert v in coords
        assert coords == {
            (Fraction(0), Fraction(0)),
            (Fraction(1, 2), Fraction(1, 4)),
            (Fraction(0), Fraction(1, 2)),
            (Fraction(1, 2), Fraction(3, 4)),
        }

    def test_denominators_divide_det(self, rng):
        for _ in range(10):
            L = random_invertible(rng, rng.choice([1, 2, 3]), det_max=60)
            for v in dual_cosets(L):
                for q in v.coords:
                    assert 0 <= q < 1
                    assert L.det_abs % q.denominator == 0

    def test_closed_under_group_law(self, rng):
        for _ in range(5):
            L = random_invertible(rng, 2, det_max=24)
            reps = {v.coords for v in dual_cosets(L)}
            lst = list(reps)
            for a in lst:
                for b in lst:
                    s = tuple((x + y) % 1 for x, y in zip(a, b))
                    assert s in reps
            for a in lst:
                assert tuple((-x) % 1 for x in a) in reps


class TestRealLattices:
    def test_normalize_shape_trivial(self):
        A = normalize_shape(parse_matrix("5,0;0,5"))
        assert np.allclose(A.basis, np.eye(2))
        assert abs(A.volume - 1.0) < 1e-12

    def test_normalize_shape_off_diagonal(self):
        A = normalize_shape(parse_matrix("2,1;0,2"))
        assert np.allclose(A.basis, np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_normalize_shape_anisotropic(self):
        n = 4
        A = normalize_shape(IntegerLattice.from_rows([[n, 0], [0, n * n]]))
        assert np.allclose(A.basis, np.diag([n**-0.5, n**0.5]))

    @given(_matrices(max_r=3, max_entry=9))
    @settings(max_examples=40, deadline=None)
    def test_normalized_volume_one(self, rows):
        try:
            L = IntegerLattice.from_rows(rows)
        except SingularMatrixError:
            assume(False)
        assert abs(normalize_shape(L).volume - 1.0) < 1e-12

    def test_dual_of_dual(self):
        A = named_lattice("hexagonal_A2")
        assert np.allclose(A.dual().dual().basis, A.basis, atol=1e-12)
        g = A.gram
        assert np.allclose(g, g.T)
        assert np.all(np.linalg.eigvalsh(g) > 0)

    def test_named_square(self):
        assert np.allclose(named_lattice("square_r", 2).basis, np.eye(2))
        assert np.allclose(named_lattice("square", 3).basis, np.eye(3))

    def test_named_hexagonal(self):
        A = named_lattice("hexagonal_A2")
        assert abs(A.volume - 1.0) < 1e-12
        g = A.gram
        assert abs(g[0, 1] / g[0, 0] - 0.5) < 1e-12
        assert abs(g[0, 0] - g[1, 1]) < 1e-12

    def test_named_fcc(self):
        A = named_lattice("fcc_D3")
        assert abs(A.volume - 1.0) < 1e-12
        m = shortest_vector(A)
        assert abs(m * m - 2.0 ** (1.0 / 3.0)) < 1e-12

    def test_named_unknown(self):
        with pytest.raises(UnknownLatticeError):
            named_lattice("leech")


class TestShortestVector:
    def test_square(self):
        assert abs(shortest_vector(named_lattice("square", 2)) - 1.0) < 1e-12

    def test_hexagonal(self):
        m = shortest_vector(named_lattice("hexagonal_A2"))
        assert abs(m - (4.0 / 3.0) ** 0.25) < 1e-12

    def test_scaling(self):
        assert abs(shortest_vector(RealLattice(2 * np.eye(2))) - 2.0) < 1e-12

    def test_skewed_basis_not_fooled(self):
        # shortest vector is a combination, not a basis vector
        A = RealLattice(np.array([[1.0, 0.9], [0.0, 0.5]]))
        m = shortest_vector(A)
        assert abs(m - math.hypot(0.1, 0.5)) < 1e-12

    def test_dimension_cap(self):
        with pytest.raises(DimensionTooLargeError):
            shortest_vector(RealLattice(np.eye(5)))


class TestParsing:
    def test_round_trip(self):
        assert parse_matrix("2,1;0,2").mat == ((2, 1), (0, 2))

    def test_whitespace(self):
        assert parse_matrix(" 2 , 1 ; 0 , 2 ").mat == ((2, 1), (0, 2))

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            parse_matrix("1,2;2,4")

    def test_non_square(self):
        with pytest.raises(SingularMatrixError):
            parse_matrix("1,2,3;4,5,6")

    def test_non_integer(self):
        with pytest.raises(SingularMatrixError):
            parse_matrix("1.5,0;0,1")

    def test_real_matrix(self):
        A = parse_real_matrix("1.5,0;0,2")
        assert abs(A.volume - 3.0) < 1e-12
