import math

import numpy as np
import pytest

from toruslab.errors import TruncationError
from toruslab.lattices import (
    IntegerLattice,
    RealLattice,
    enumerate_cosets,
    named_lattice,
    parse_matrix,
)
from toruslab.theta import (
    T_SWITCH_CONTINUOUS,
    certified_bessel_radius,
    heat_kernel_torus,
    hk_scaling_limit_check,
    theta_continuous,
    theta_discrete_bessel,
    theta_discrete_spectral,
)

from conftest import random_invertible


class TestDiscreteTheta:
    def test_two_cycle_value(self):
        # spectrum {0, 4}
        want = 1.0 + math.exp(-0.4)
        assert abs(theta_discrete_spectral(parse_matrix("2"), 0.1) - want) < 1e-14
        assert abs(theta_discrete_bessel(parse_matrix("2"), 0.1) - want) < 1e-12

    def test_at_zero_counts_vertices(self):
        L = parse_matrix("3,1;0,4")
        assert theta_discrete_spectral(L, 0.0) == L.det_abs

    def test_large_t_limit(self):
        L = parse_matrix("3,1;0,4")
        assert abs(theta_discrete_spectral(L, 60.0) - 1.0) < 1e-12

    def test_trivial_quotient_mass(self):
        # det = 1: the lattice sum collects all of Z^r, total heat mass 1
        for t in (0.3, 1.7):
            assert abs(theta_discrete_bessel(parse_matrix("1,0;0,1"), t) - 1.0) < 1e-12

    def test_inversion_random_lattices(self, rng):
        for _ in range(20):
            L = random_invertible(rng, rng.choice([1, 2, 3]), det_max=200)
            for t in (0.3, 1.0, 3.0):
                s = theta_discrete_spectral(L, t)
                b = theta_discrete_bessel(L, t)
                assert abs(s - b) < 1e-10 * s

    def test_radius_verification(self):
        L = parse_matrix("2")
        need = certified_bessel_radius(L, 2.0)
        with pytest.raises(TruncationError):
            theta_discrete_bessel(L, 2.0, truncation_radius=max(1, need // 4))
        v = theta_discrete_bessel(L, 2.0, truncation_radius=need + 5)
        assert abs(v - theta_discrete_spectral(L, 2.0)) < 1e-10


class TestHeatKernel:
    def test_delta_at_zero(self):
        L = parse_matrix("4")
        assert heat_kernel_torus(L, 0.0, (0,)).value == 1.0
        assert heat_kernel_torus(L, 0.0, (2,)).value == 0.0
        assert heat_kernel_torus(L, 0.0, (4,)).value == 1.0  # 4 ≡ 0

    def test_branches_agree_offsite(self):
        hk = heat_kernel_torus(parse_matrix("4"), 0.3, (2,))
        assert hk.branch_gap < 1e-11

    def test_branches_agree_random(self, rng):
        for _ in range(6):
            L = random_invertible(rng, 2, det_max=60)
            x = enumerate_cosets(L)[rng.randrange(L.det_abs)]
            hk = heat_kernel_torus(L, 0.6, x)
            assert hk.branch_gap < 1e-11

    def test_mass_conservation(self, rng):
        for _ in range(4):
            L = random_invertible(rng, 2, det_max=50)
            t = 0.4 + rng.random()
            total = math.fsum(
                heat_kernel_torus(L, t, x).geometric for x in enumerate_cosets(L)
            )
            assert abs(total - 1.0) < 1e-11


class TestContinuousTheta:
    def test_self_dual_point(self):
        # at t = 1/(4π) both branches of the integer lattice are the same series
        for r in (1, 2, 3):
            A = named_lattice("square", r)
            t = 1.0 / (4.0 * math.pi)
            s = theta_continuous(A, t, "spectral")
            g = theta_continuous(A, t, "geometric")
            assert abs(s - g) < 1e-13 * s

    def test_branch_agreement_at_switch(self):
        for name in ("square", "hexagonal_A2", "fcc_D3"):
            A = named_lattice(name, 2)
            for t in (T_SWITCH_CONTINUOUS, 0.02):
                s = theta_continuous(A, t, "spectral")
                g = theta_continuous(A, t, "geometric")
                assert abs(s - g) < 1e-12 * max(s, 1.0)

    def test_large_t_limit(self):
        assert abs(theta_continuous(named_lattice("square", 2), 40.0) - 1.0) < 1e-14

    def test_non_unit_volume_poisson(self):
        A = RealLattice([[2.0, 0.3], [0.0, 0.7]])
        for t in (0.05, 0.4):
            s = theta_continuous(A, t, "spectral")
            g = theta_continuous(A, t, "geometric")
            assert abs(s - g) < 1e-12 * max(s, 1.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            theta_continuous(named_lattice("square", 2), 0.0)


class TestScalingLimit:
    def test_central_value(self):
        rep = hk_scaling_limit_check([25, 50, 100, 200], k=0, alpha=1.0, t=1.0)
        assert abs(rep.limit - 0.28209479177387814) < 1e-15
        assert rep.errors[-1] < 1e-3
        assert rep.decreasing_from is not None and rep.converged

    def test_offset_value(self):
        rep = hk_scaling_limit_check([25, 50, 100, 200], k=1, alpha=1.0, t=1.0)
        assert abs(rep.limit - 0.21969564473386120) < 1e-15
        assert rep.errors[-1] < 1e-3 and rep.converged

    def test_formula_instance(self):
        rep = hk_scaling_limit_check([10, 20], k=0, alpha=2.0, t=100.0)
        assert abs(rep.limit - 2.0 / math.sqrt(400.0 * math.pi)) < 1e-15

    def test_validation(self):
        with pytest.raises(ValueError):
            hk_scaling_limit_check([5, 5], k=0, alpha=1.0, t=1.0)
        with pytest.raises(ValueError):
            hk_scaling_limit_check([5, 10], k=0, alpha=0.0, t=1.0)


class TestScalingLaws:
    def test_pointwise_theta_convergence(self):
        # Λ_n = n·B: θ_{Λ_n}(det^{2/r} t) → Θ_shape(t), error at least halving
        base = parse_matrix("2,1;0,2")
        A = RealLattice(np.array([[1.0, 0.5], [0.0, 1.0]]))
        for t in (0.5, 1.0, 2.0):
            errs = []
            for n in (2, 4, 8, 16):
                Ln = IntegerLattice.from_rows([[n * x for x in row] for row in base.mat])
                u2 = float(Ln.det_abs)  # det^{2/r} with r = 2
                errs.append(abs(theta_discrete_spectral(Ln, u2 * t) - theta_continuous(A, t)))
            for a, b in zip(errs, errs[1:]):
                assert b <= max(0.6 * a, 5e-14)

    def test_uniform_bound_fitted_decay(self):
        # θ_{Λ_n}(u²t) ≤ 1 + Σ_j e^{-dtj} = 1 + 1/(e^{dt} - 1) for one fitted d > 0
        base = parse_matrix("2,1;0,2")
        ts = [0.25, 0.5, 1.0, 2.0, 4.0]
        ns = [3, 6, 12]
        thetas = {}
        for n in ns:
            Ln = IntegerLattice.from_rows([[n * x for x in row] for row in base.mat])
            u2 = float(Ln.det_abs)
            for t in ts:
                thetas[(n, t)] = theta_discrete_spectral(Ln, u2 * t)
        d_fit = min(
            math.log1p(1.0 / max(max(thetas[(n, t)] for n in ns) - 1.0, 1e-300)) / t
            for t in ts
        )
        assert d_fit > 0.0
        for (n, t), val in thetas.items():
            assert val - 1.0 <= 1.0 / math.expm1(d_fit * t) + 1e-12
