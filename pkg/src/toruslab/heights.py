"""Epstein zeta functions, regularized determinants (heights) of real tori,
the dimensional constants c_r, and the exact spectral splitting identity
linking discrete spectra to the lattice-free and lattice-dependent integrals.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import exp1, rgamma

from .besselfns import i0_power_tail_integral, scaled_bessel_batch, scaled_bessel_i
from .errors import NotUnitVolumeError, PoleError
from .lattices import IntegerLattice, RealLattice
from .quadrature import QuadratureSpec, integrate_adaptive
from .spectral import EXACT_DET_CAP, count_spanning_trees, log_det_star_float
from .theta import (
    T_SWITCH_CONTINUOUS,
    _eigen_list,
    _gaussian_radius,
    _lattice_points_in_box,
    _min_gram_eigenvalue,
    certified_bessel_radius,
    gaussian_lattice_sum,
    theta_continuous_off_zero,
)

EULER_GAMMA = 0.57721566490153286  # Γ'(1) = -γ

_TAIL_T = 40.0
_SPEC = QuadratureSpec(split_point=_TAIL_T, rel_tol=1e-12, abs_tol=1e-13)


def _h_pow(r: int, t: float) -> float:
    """(e^{-2t} I_0(2t))^r, the lattice-free heat-trace density."""
    return scaled_bessel_i(0, 2.0 * t) ** r


@dataclass(frozen=True)
class CrConstant:
    r: int
    value: float
    quadrature_error: float


def c_constant(r: int) -> CrConstant:
    """c_r = log 2r - ∫_0^∞ e^{-2rt}(I_0(2t)^r - 1) dt/t.

    Adaptive quadrature on [0, T] plus the closed-form tail from the
    large-argument expansion of the scaled Bessel factor.
    """
    if not 1 <= r <= 8:
        raise ValueError("r must be in 1..8")

    def g(t):
        if t == 0.0:
            return 0.0
        return (_h_pow(r, t) - math.exp(-2.0 * r * t)) / t

    head = integrate_adaptive(g, 0.0, _TAIL_T, _SPEC)
    tail = i0_power_tail_integral(r, _TAIL_T) - float(exp1(2.0 * r * _TAIL_T))
    value = math.log(2 * r) - head.value - tail
    return CrConstant(r=r, value=value, quadrature_error=head.error + 1e-13)


def _integrate_maybe_complex(f, a, b, spec, is_complex):
    if not is_complex:
        return integrate_adaptive(f, a, b, spec).value
    re = integrate_adaptive(lambda t: f(t).real, a, b, spec).value
    im = integrate_adaptive(lambda t: f(t).imag, a, b, spec).value
    return complex(re, im)


def script_i(r: int, s) -> float | complex:
    """𝓘_r(s) = -∫_0^∞ (e^{-s²t} e^{-2rt} I_0(2t)^r - e^{-t}) dt/t for
    Re(s²) > 0, evaluated directly at s = 0 where the integral still
    converges (and equals c_r)."""
    s = complex(s)
    s2 = s * s
    if s2.real < 0:
        raise ValueError("need Re(s^2) > 0 (or s = 0)")
    is_complex = s2.imag != 0.0
    if s == 0:
        def g0(t):
            if t == 0.0:
                return float(1 - 2 * r)
            return (_h_pow(r, t) - math.exp(-t)) / t

        head = integrate_adaptive(g0, 0.0, _TAIL_T, _SPEC).value
        tail = i0_power_tail_integral(r, _TAIL_T) - float(exp1(_TAIL_T))
        return -(head + tail)

    def g(t):
        if t == 0.0:
            return 1 - s2.real - 2 * r if not is_complex else complex(1 - 2 * r) - s2
        ex = cmath.exp(-s2 * t) if is_complex else math.exp(-s2.real * t)
        return (ex * _h_pow(r, t) - math.exp(-t)) / t

    if is_complex:
        head = _integrate_maybe_complex(g, 0.0, _TAIL_T, _SPEC, True)
        re = integrate_adaptive(lambda t: g(t).real, _TAIL_T, math.inf, _SPEC).value
        im = integrate_adaptive(lambda t: g(t).imag, _TAIL_T, math.inf, _SPEC).value
        return -(head + complex(re, im))
    head = integrate_adaptive(g, 0.0, _TAIL_T, _SPEC).value
    rest = integrate_adaptive(g, _TAIL_T, math.inf, _SPEC).value
    return -(head + rest)


def _discrete_bessel_off_zero(L: IntegerLattice, t: float) -> float:
    """det · Σ_{y∈ΛZ^r, y≠0} e^{-2rt} Π I_{y_k}(2t): the lattice part of the
    discrete theta with the free term removed, no cancellation."""
    R = certified_bessel_radius(L, t)
    batch = scaled_bessel_batch(R, 2.0 * t)
    terms = []
    for y in _lattice_points_in_box(L, R):
        if not any(y):
            continue
        prod = 1.0
        for yk in y:
            prod *= batch[abs(yk)]
            if prod == 0.0:
                break
        if prod:
            terms.append(prod)
    return L.det_abs * math.fsum(terms)


def script_h(L: IntegerLattice, s) -> float:
    """𝓗_Λ(s) = -∫_0^∞ (e^{-s²t}[θ_Λ(t) - det·e^{-2rt}I_0(2t)^r - 1] + e^{-t}) dt/t.

    Bessel branch below t = 1 (difference formed term-by-term), spectral
    branch above; at s = 0 the power-law tail is integrated in closed form.
    The limit point is meant to be evaluated at s = 0 exactly — for tiny
    positive s the exponential cutoff arrives late and the tail doubling
    gets slow.
    """
    s = float(s)
    if s < 0:
        raise ValueError("need s >= 0")
    r, det = L.r, L.det_abs
    s2 = s * s
    lams = [lam for lam in _eigen_list(L) if lam != 0.0]

    def f_small(t):
        if t == 0.0:
            return float(s2 - 1)
        off0 = _discrete_bessel_off_zero(L, t)
        return (math.exp(-s2 * t) * off0 - math.exp(-t) * math.expm1((1.0 - s2) * t)) / t

    def g_mid(t):
        gs = math.fsum(math.exp(-t * lam) for lam in lams) - det * _h_pow(r, t)
        return (math.exp(-s2 * t) * gs + math.exp(-t)) / t

    i_small = integrate_adaptive(f_small, 0.0, 1.0, _SPEC).value
    if s == 0.0:
        i_mid = integrate_adaptive(g_mid, 1.0, _TAIL_T, _SPEC).value
        i_tail = (
            math.fsum(float(exp1(lam * _TAIL_T)) for lam in lams)
            - det * i0_power_tail_integral(r, _TAIL_T)
            + float(exp1(_TAIL_T))
        )
        return -(i_small + i_mid + i_tail)
    i_rest = integrate_adaptive(g_mid, 1.0, math.inf, _SPEC).value
    return -(i_small + i_rest)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    s: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def spectral_log_identity_check(L: IntegerLattice, s: float) -> IdentityCheck:
    """Σ_{λ_v≠0} log(s² + λ_v) against det·𝓘_r(s) + 𝓗_Λ(s); at s = 0 the
    left side is tied to the exact integer det* when within the exact cap."""
    s = float(s)
    lams = [lam for lam in _eigen_list(L) if lam != 0.0]
    if s == 0.0:
        if L.det_abs <= EXACT_DET_CAP:
            lhs = math.log(count_spanning_trees(L).det_star)
        else:
            lhs = log_det_star_float(L)
    else:
        lhs = math.fsum(math.log(s * s + lam) for lam in lams)
    rhs = L.det_abs * script_i(L.r, s) + script_h(L, s)
    return IdentityCheck(lhs=lhs, rhs=float(rhs), s=s)


def _dual_e1_sum(A: RealLattice) -> float:
    """Σ_{m≠0} E₁(4π² ||A*m||²) = ∫_1^∞ (Θ_A(t) - 1) dt/t, summed termwise
    over a certified box."""
    basis = A.dual_basis
    r = A.r
    mu = _min_gram_eigenvalue(basis)
    M = _gaussian_radius(4.0 * math.pi**2 * mu, r, tol=1e-18)
    axes = [np.arange(-M, M + 1)] * r
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, r)
    grid = grid[np.any(grid != 0, axis=1)]
    vecs = grid @ basis.T
    q = 4.0 * math.pi**2 * np.einsum("ij,ij->i", vecs, vecs)
    return float(np.sum(exp1(q)))


@dataclass(frozen=True)
class HeightResult:
    """log det*Δ of a unit-volume real torus, with its audit trail."""

    lattice: RealLattice
    log_det_star: float
    small_t_integral: float
    large_t_integral: float
    constant_terms: float
    zeta_log_det_star: float | None = None

    @property
    def height(self) -> float:
        return -self.log_det_star

    @property
    def cross_check_gap(self) -> float | None:
        if self.zeta_log_det_star is None:
            return None
        return abs(self.log_det_star - self.zeta_log_det_star)


def height(A: RealLattice, cross_check: bool = True) -> HeightResult:
    """log det*Δ = γ + (2/r)(4π)^{-r/2} - ∫_0^1 (Θ_A(t) - (4πt)^{-r/2}) dt/t
    - ∫_1^∞ (Θ_A(t) - 1) dt/t, for volume-1 lattices only.

    Optionally cross-checked against -Z'_A(0) by numerical differentiation of
    the continued Epstein zeta.
    """
    if abs(A.volume - 1.0) > 1e-9:
        raise NotUnitVolumeError(f"height needs volume 1, got {A.volume}")
    r = A.r
    ct = lambda t: (4.0 * math.pi * t) ** (-r / 2.0)
    ts = T_SWITCH_CONTINUOUS

    def f_geom(t):  # t < ts: Θ - (4πt)^{-r/2} equals the off-zero Poisson sum
        return theta_continuous_off_zero(A, t, "geometric") / t

    def f_dual(t):
        return (1.0 + theta_continuous_off_zero(A, t, "spectral") - ct(t)) / t

    small = (
        integrate_adaptive(f_geom, 0.0, ts, _SPEC).value
        + integrate_adaptive(f_dual, ts, 1.0, _SPEC).value
    )
    large = _dual_e1_sum(A)
    const = EULER_GAMMA + (2.0 / r) * (4.0 * math.pi) ** (-r / 2.0)
    log_det = const - small - large
    zeta_val = -epstein_zeta_derivative_at_zero(A) if cross_check else None
    return HeightResult(
        lattice=A,
        log_det_star=log_det,
        small_t_integral=small,
        large_t_integral=large,
        constant_terms=const,
        zeta_log_det_star=zeta_val,
    )


def epstein_zeta(A: RealLattice, s) -> complex:
    """Z_A(s) = Σ_{m≠0} λ_m^{-s} with λ_m = (2π)²||A*m||², continued to all
    s ≠ r/2 by the two-sided incomplete-gamma (Riemann) splitting.

    The completed form Λ(s) = -1/s + V⁻¹/(s - r/2) + J₁(s) + V⁻¹ J₂(s) with
    J₁(s) = ∫_1^∞ (θ_dual(u)-1) u^{s-1} du and
    J₂(s) = ∫_1^∞ (θ_primal(u)-1) u^{r/2-s-1} du gives
    Z = π^s Γ(s)⁻¹ (2π)^{-2s} Λ(s); the Γ(s)⁻¹/s product is kept in the
    cancellation-free form -rgamma(s)/s + rgamma(s)·(rest).
    """
    s = complex(s)
    r = A.r
    if abs(s - r / 2.0) < 1e-9:
        raise PoleError(f"Epstein zeta has its pole at s = r/2 = {r / 2}")
    if s == 0:
        return complex(-1.0)
    is_complex = s.imag != 0.0
    B = A.dual_basis  # eigenvalue norms are ||A* m||^2
    V_inv = A.volume  # 1 / covol(dual lattice)

    def theta_dual_off(u):
        return gaussian_lattice_sum(B, math.pi * u, include_zero=False)

    def theta_primal_off(u):
        return gaussian_lattice_sum(A.basis, math.pi * u, include_zero=False)

    e1 = s - 1 if is_complex else s.real - 1.0
    e2 = r / 2.0 - s - 1 if is_complex else r / 2.0 - s.real - 1.0
    j1 = _integrate_maybe_complex(
        lambda u: theta_dual_off(u) * u**e1, 1.0, math.inf, _SPEC, is_complex
    )
    j2 = _integrate_maybe_complex(
        lambda u: theta_primal_off(u) * u**e2, 1.0, math.inf, _SPEC, is_complex
    )
    rest = V_inv / (s - r / 2.0) + j1 + V_inv * j2
    rg = complex(rgamma(s))
    f = rg / s  # = 1/(s Γ(s)) = 1/Γ(s+1), finite at s = 0
    val = (cmath.exp(s * math.log(math.pi)) * (-f + rg * rest)) * cmath.exp(
        -2.0 * s * math.log(2.0 * math.pi)
    )
    return val


def epstein_zeta_derivative_at_zero(A: RealLattice, step: float = 0.01) -> float:
    """Z'_A(0) by a 5-point central stencil on the continued zeta."""
    z = lambda x: epstein_zeta(A, x).real
    return (z(-2 * step) - 8 * z(-step) + 8 * z(step) - z(2 * step)) / (12 * step)


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    margin: float
    bound: float
    log_det_star: float


def ss_bound_check(A: RealLattice) -> BoundCheck:
    """Upper bound for unit-volume flat tori: log det*Δ < γ - log 4π + 2/r."""
    res = height(A, cross_check=False)
    bound = EULER_GAMMA - math.log(4.0 * math.pi) + 2.0 / A.r
    return BoundCheck(
        holds=res.log_det_star < bound,
        margin=bound - res.log_det_star,
        bound=bound,
        log_det_star=res.log_det_star,
    )
