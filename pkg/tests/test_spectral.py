import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from toruslab.errors import CapExceededError
from toruslab.lattices import IntegerLattice, parse_matrix
from toruslab.spectral import (
    build_laplacian,
    cofactor,
    count_spanning_trees,
    eigenvalues,
    log_det_star_float,
)

from conftest import random_invertible


def _rounded_multiset(values, digits=9):
    return Counter(round(v, digits) for v in values)


class TestLaplacian:
    def test_three_cycle_circulant(self):
        lap = build_laplacian(parse_matrix("3"))
        assert (lap.dense() == np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])).all()

    def test_doubled_edge(self):
        # +1 ≡ -1 mod 2, so the two generators give parallel edges
        lap = build_laplacian(parse_matrix("2"))
        assert (lap.dense() == np.array([[2, -2], [-2, 2]])).all()

    def test_trivial_quotient_all_loops(self):
        lap = build_laplacian(parse_matrix("1,0;0,1"))
        assert lap.size == 1
        assert lap.dense()[0, 0] == 0

    def test_invariants(self, rng):
        for _ in range(8):
            L = random_invertible(rng, rng.choice([2, 3]), det_max=80, det_min=3)
            lap = build_laplacian(L)
            dense = lap.dense()
            assert (dense == dense.T).all()
            assert all(sum(row.values()) == 0 for row in lap.rows)
            for i, row in enumerate(lap.rows):
                offdiag = [v for j, v in row.items() if j != i]
                assert all(-2 * L.r <= v < 0 for v in offdiag)
                assert row.get(i, 0) <= 2 * L.r

    def test_cap(self):
        with pytest.raises(CapExceededError):
            build_laplacian(parse_matrix("60,0;0,60"), cap=100)


class TestEigenvalues:
    def test_three_i2_multiset(self):
        spec = eigenvalues(parse_matrix("3,0;0,3"))
        assert _rounded_multiset(spec.values) == Counter({0.0: 1, 3.0: 4, 6.0: 4})
        assert spec.zero_multiplicity == 1

    def test_worked_eigenvalue(self):
        spec = eigenvalues(parse_matrix("2,1;0,2"))
        by_coords = {v.coords: lam for v, lam in spec.eigen_pairs}
        lam = by_coords[(Fraction(1, 2), Fraction(3, 4))]
        assert abs(lam - 6.0) < 1e-12  # 4(sin²(π/2) + sin²(3π/4)) = 6

    def test_range_bound(self, rng):
        for _ in range(6):
            L = random_invertible(rng, rng.choice([1, 2, 3]), det_max=120)
            spec = eigenvalues(L)
            assert all(0.0 <= lam <= 4.0 * L.r + 1e-12 for lam in spec.values)
            assert spec.zero_multiplicity == 1
            assert len(spec.eigen_pairs) == L.det_abs

    def test_negation_symmetry(self, rng):
        for _ in range(6):
            L = random_invertible(rng, 2, det_max=90)
            spec = eigenvalues(L)
            by_coords = {v.coords: lam for v, lam in spec.eigen_pairs}
            for v, lam in spec.eigen_pairs:
                neg = tuple((-q) % 1 for q in v.coords)
                assert abs(by_coords[neg] - lam) < 1e-12

    def test_diagonal_product_torus_oracle(self):
        # brute force over all (m_1, ..., m_r)
        for dims in [(4,), (2, 3), (3, 5), (2, 2, 2)]:
            L = IntegerLattice.from_rows(np.diag(dims).tolist())
            expected = []
            for m in itertools.product(*(range(n) for n in dims)):
                expected.append(
                    sum(4 * math.sin(math.pi * mk / nk) ** 2 for mk, nk in zip(m, dims))
                )
            got = sorted(eigenvalues(L).values)
            assert np.allclose(sorted(expected), got, atol=1e-12)


class TestTreeCount:
    def test_cycles(self):
        for n in (2, 3, 7, 50):
            tc = count_spanning_trees(parse_matrix(str(n)))
            assert tc.tau == n
            assert tc.det_star == n * n

    def test_doubled_square(self):
        # spectrum {0, 4, 4, 8}: det* = 128, τ = 32 (= 4·2³ for the doubled C₄)
        tc = count_spanning_trees(parse_matrix("2,0;0,2"))
        assert tc.tau == 32 and tc.det_star == 128

    def test_three_torus(self):
        tc = count_spanning_trees(parse_matrix("3,0;0,3"))
        assert tc.tau == 11664 and tc.det_star == 104976

    def test_single_vertex_convention(self):
        tc = count_spanning_trees(parse_matrix("1,0;0,1"))
        assert tc.tau == 1 and tc.det_star == 1

    def test_det_star_identity(self, rng):
        for _ in range(6):
            L = random_invertible(rng, 2, det_max=60)
            tc = count_spanning_trees(L)
            assert tc.det_star == tc.tau * L.det_abs

    def test_all_cofactors_equal(self, rng):
        for _ in range(4):
            L = random_invertible(rng, 2, det_max=40, det_min=3)
            tau = count_spanning_trees(L).tau
            n = L.det_abs
            for drop in rng.sample(range(n), min(3, n)):
                assert cofactor(L, drop) == tau

    def test_matrix_tree_vs_spectrum(self, rng):
        for _ in range(10):
            L = random_invertible(rng, rng.choice([2, 3]), det_max=150)
            tau = count_spanning_trees(L).tau
            prod = 1.0
            for lam in eigenvalues(L).values:
                if lam > 0:
                    prod *= lam
            assert abs(prod / L.det_abs - tau) / tau < 1e-9

    def test_cap(self):
        with pytest.raises(CapExceededError):
            count_spanning_trees(parse_matrix("50,0;0,50"), cap=100)


class TestBareissElimination:
    def test_pivot_search_with_shared_columns(self):
        # zero leading pivots force row swaps whose rows share columns
        from toruslab.lattices import _det_int
        from toruslab.spectral import _bareiss_sparse_det

        cases = [
            [[0, 1], [1, 0]],
            [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
            [[0, 2, 3], [0, 0, 5], [7, 1, 2]],
            [[0, 0, 1, 4], [2, 0, 0, 1], [0, 3, 1, 0], [1, 1, 0, 0]],
        ]
        for mat in cases:
            rows = [
                {j: v for j, v in enumerate(row) if v} for row in mat
            ]
            assert _bareiss_sparse_det(rows, len(mat)) == _det_int(mat)

    def test_singular_returns_zero(self):
        from toruslab.spectral import _bareiss_sparse_det

        rows = [{0: 1, 1: 2}, {0: 2, 1: 4}]
        assert _bareiss_sparse_det(rows, 2) == 0

    def test_random_vs_dense_oracle(self, rng):
        from toruslab.lattices import _det_int
        from toruslab.spectral import _bareiss_sparse_det

        for _ in range(40):
            n = rng.randint(1, 6)
            mat = [[rng.randint(-9, 9) if rng.random() < 0.7 else 0 for _ in range(n)]
                   for _ in range(n)]
            rows = [{j: v for j, v in enumerate(row) if v} for row in mat]
            assert _bareiss_sparse_det(rows, n) == _det_int(mat)


class TestLogDetStarFloat:
    def test_four_cycle(self):
        assert abs(log_det_star_float(parse_matrix("4")) - math.log(16)) < 1e-12

    def test_examples(self):
        assert abs(log_det_star_float(parse_matrix("3,0;0,3")) - math.log(104976)) < 1e-10
        assert abs(log_det_star_float(parse_matrix("2,0;0,2")) - math.log(128)) < 1e-12

    def test_agrees_with_exact(self, rng):
        for _ in range(6):
            L = random_invertible(rng, 2, det_max=200)
            exact = math.log(count_spanning_trees(L).det_star)
            assert abs(log_det_star_float(L) - exact) / exact < 1e-10
