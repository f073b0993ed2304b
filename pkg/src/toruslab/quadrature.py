"""Adaptive Gauss-Kronrod quadrature with doubling for infinite upper limits.

Deterministic: panels are split worst-error-first with ties broken by
position, so results do not depend on evaluation order or thread count.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import NonConvergenceError

# 15-point Kronrod nodes on [-1, 1] and weights, with the embedded 7-point
# Gauss weights on the shared nodes (odd indices).
_XK = (
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993944, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0, 0.2077849550078985, 0.4058451513773972,
    0.5860872354676911, 0.7415311855993944, 0.8648644233597691,
    0.9491079123427585, 0.9914553711208126,
)
_WK = (
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278, 0.2044329400752989,
    0.1903505780647854, 0.1690047266392679, 0.1406532597155259,
    0.1047900103222502, 0.0630920926299785, 0.0229353220105292,
)
_WG = (
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
    0.1294849661688697,
)


@dataclass(frozen=True)
class QuadratureSpec:
    split_point: float = 40.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    tail_expansion_order: int = 8
    max_panels: int = 4000
    max_doublings: int = 60

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.split_point < 1:
            raise ValueError("tolerances must be positive and split_point >= 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def _gk15(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fk = [f(mid + half * x) for x in _XK]
    k = half * math.fsum(w * v for w, v in zip(_WK, fk))
    g = half * math.fsum(w * fk[2 * i + 1] for i, w in enumerate(_WG))
    return k, abs(k - g)


def _adaptive(f, a: float, b: float, spec: QuadratureSpec):
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total_val, total_err = val, err
    panels = 1
    while True:
        if not (math.isfinite(total_val) and math.isfinite(total_err)):
            raise NonConvergenceError(
                "integrand produced non-finite values (divergent or singular)",
                partial=total_val,
                error_estimate=total_err,
            )
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total_val)):
            return total_val, total_err
        if panels >= spec.max_panels:
            raise NonConvergenceError(
                f"quadrature did not converge after {panels} panels "
                f"(error estimate {total_err:.3e})",
                partial=total_val,
                error_estimate=total_err,
            )
        neg_err, pa, pb, pval = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        lval, lerr = _gk15(f, pa, pm)
        rval, rerr = _gk15(f, pm, pb)
        total_val += lval + rval - pval
        total_err += lerr + rerr - (-neg_err)
        heapq.heappush(heap, (-lerr, pa, pm, lval))
        heapq.heappush(heap, (-rerr, pm, pb, rval))
        panels += 1


def integrate_adaptive(
    f,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    tail_exponent: float | None = None,
    tail_coefficient: float | None = None,
) -> QuadResult:
    """Integrate f on [a, b], b = math.inf allowed.

    For infinite b the finite part runs to `spec.split_point` and the tail is
    handled either by the caller-supplied power-law model
    (f(t) ~ tail_coefficient * t**-tail_exponent) or by interval doubling
    until two consecutive segments are negligible.
    """
    spec = spec or DEFAULT_SPEC
    if not math.isinf(b):
        val, err = _adaptive(f, a, b, spec)
        return QuadResult(val, err)

    T = max(spec.split_point, a + 1.0)
    val, err = _adaptive(f, a, T, spec)
    if tail_exponent is not None:
        if tail_exponent <= 1:
            raise NonConvergenceError(
                f"power-law tail t^-{tail_exponent} is not integrable",
                partial=val, error_estimate=math.inf,
            )
        c = tail_coefficient if tail_coefficient is not None else f(T) * T**tail_exponent
        tail = c * T ** (1.0 - tail_exponent) / (tail_exponent - 1.0)
        return QuadResult(val + tail, err + abs(tail) * 1e-2)

    lo, hi = T, 2.0 * T
    quiet = 0
    for _ in range(spec.max_doublings):
        seg, seg_err = _adaptive(f, lo, hi, spec)
        val += seg
        err += seg_err
        if abs(seg) <= max(spec.abs_tol, spec.rel_tol * abs(val)):
            quiet += 1
            if quiet >= 2:
                return QuadResult(val, err + abs(seg))
        else:
            quiet = 0
        lo, hi = hi, 2.0 * hi
    raise NonConvergenceError(
        "tail did not decay after doubling to t = %g" % lo,
        partial=val, error_estimate=err,
    )


def integrate_dt_over_t(f, a: float, b: float, spec: QuadratureSpec | None = None) -> QuadResult:
    """int_a^b f(t) dt/t via the substitution t = e^u, for integrands spread
    over many decades.  a = 0 is allowed when f decays at 0 at least like a
    positive power; the window then reaches 60 e-folds below b."""
    spec = spec or DEFAULT_SPEC
    if a < 0 or b <= a or math.isinf(b):
        raise ValueError("need 0 <= a < b < inf")
    lo = math.log(a) if a > 0 else math.log(b) - 60.0
    val, err = _adaptive(lambda u: f(math.exp(u)), lo, math.log(b), spec)
    return QuadResult(val, err)
