"""Exact integer-lattice machinery: normal forms, coset enumeration, duals.

All coset arithmetic is exact (Python ints / fractions.Fraction); floating
point only enters in the real-lattice helpers at the bottom.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    CapExceededError,
    DimensionTooLargeError,
    SingularMatrixError,
    UnknownLatticeError,
)

DEFAULT_COSET_CAP = 10**7


def coset_cap() -> int:
    """Enumeration cap (memory guard); TORUS_MAX_COSETS overrides."""
    env = os.environ.get("TORUS_MAX_COSETS")
    return int(env) if env else DEFAULT_COSET_CAP


def _det_int(mat) -> int:
    """Exact determinant of a small integer matrix (fraction-free elimination)."""
    a = [[int(x) for x in row] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _adjugate_int(mat) -> list[list[int]]:
    """Exact adjugate: adj(M)·M = det(M)·I."""
    n = len(mat)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[mat[p][q] for q in range(n) if q != i] for p in range(n) if p != j]
            adj[i][j] = (-1) ** (i + j) * _det_int(minor)
    return adj


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _matmul_int(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


@dataclass(frozen=True)
class IntegerLattice:
    """Sublattice ΛZ^r of Z^r given by an invertible integer matrix Λ.

    Columns of `mat` are the generators.  `det_abs` is the index of the
    sublattice, i.e. the number of vertices of the quotient torus.
    """

    mat: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        r = len(self.mat)
        if r < 1 or any(len(row) != r for row in self.mat):
            raise SingularMatrixError("matrix must be square with r >= 1")
        if _det_int(self.mat) == 0:
            raise SingularMatrixError("singular matrix: det = 0")

    @classmethod
    def from_rows(cls, rows) -> "IntegerLattice":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @property
    def r(self) -> int:
        return len(self.mat)

    @cached_property
    def det(self) -> int:
        return _det_int(self.mat)

    @property
    def det_abs(self) -> int:
        return abs(self.det)

    @cached_property
    def adjugate(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(row) for row in _adjugate_int(self.mat))

    def contains(self, x) -> bool:
        """Membership oracle: x ∈ ΛZ^r iff Λ⁻¹x is integral."""
        adj = self.adjugate
        d = self.det
        return all(sum(adj[i][j] * x[j] for j in range(self.r)) % d == 0 for i in range(self.r))

    def transpose(self) -> "IntegerLattice":
        return IntegerLattice(tuple(zip(*self.mat)))


@dataclass(frozen=True)
class SmithDecomposition:
    """u·mat·v = diag(d) with u, v unimodular and d_i | d_{i+1}."""

    u: tuple[tuple[int, ...], ...]
    v: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]

    @cached_property
    def u_inv(self) -> tuple[tuple[int, ...], ...]:
        du = _det_int(self.u)  # ±1
        adj = _adjugate_int(self.u)
        return tuple(tuple(du * x for x in row) for row in adj)


@dataclass(frozen=True)
class DualCosetRep:
    """Element of Z^r\\Λ*Z^r as an exact rational vector in [0,1)^r."""

    coords: tuple[Fraction, ...]

    def __add__(self, other: "DualCosetRep") -> "DualCosetRep":
        return DualCosetRep(tuple((a + b) % 1 for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "DualCosetRep":
        return DualCosetRep(tuple((-a) % 1 for a in self.coords))


def smith_normal_form(L: IntegerLattice) -> SmithDecomposition:
    """Smith normal form by elimination, pivoting on the minimal nonzero entry."""
    n = L.r
    a = [list(row) for row in L.mat]
    u = _identity(n)
    v = _identity(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        for j in range(n):
            a[dst][j] += q * a[src][j]
            u[dst][j] += q * u[src][j]

    def add_col(dst, src, q):
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    for k in range(n):
        while True:
            pivot = None
            for i in range(k, n):
                for j in range(k, n):
                    if a[i][j] and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                raise SingularMatrixError("singular matrix in SNF")
            if pivot != (k, k):
                if pivot[0] != k:
                    swap_rows(k, pivot[0])
                if pivot[1] != k:
                    swap_cols(k, pivot[1])
            p = a[k][k]
            dirty = False
            for i in range(k + 1, n):
                if a[i][k]:
                    add_row(i, k, -(a[i][k] // p))
                    if a[i][k]:
                        dirty = True
            for j in range(k + 1, n):
                if a[k][j]:
                    add_col(j, k, -(a[k][j] // p))
                    if a[k][j]:
                        dirty = True
            if dirty:
                continue
            # pivot must divide the remaining block for the divisor chain
            offender = None
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    if a[i][j] % p:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(k, offender, 1)
        if a[k][k] < 0:
            for j in range(n):
                a[k][j] = -a[k][j]
                u[k][j] = -u[k][j]

    return SmithDecomposition(
        u=tuple(tuple(row) for row in u),
        v=tuple(tuple(row) for row in v),
        d=tuple(a[i][i] for i in range(n)),
    )


def _check_cap(n: int, cap: int | None):
    limit = cap if cap is not None else coset_cap()
    if n > limit:
        raise CapExceededError(f"quotient has {n} cosets, above the cap {limit}")


def coset_labeller(L: IntegerLattice):
    """Returns (d, label) where label(x) is the canonical SNF coordinate tuple
    of the coset of x; x ≡ y mod ΛZ^r iff label(x) == label(y)."""
    snf = smith_normal_form(L)
    u, d = snf.u, snf.d
    r = L.r

    def label(x):
        return tuple(sum(u[i][j] * x[j] for j in range(r)) % d[i] for i in range(r))

    return d, label


def enumerate_cosets(L: IntegerLattice, cap: int | None = None) -> list[tuple[int, ...]]:
    """The det_abs coset representatives of ΛZ^r\\Z^r, in lexicographic order
    of their Smith-coordinate labels."""
    _check_cap(L.det_abs, cap)
    snf = smith_normal_form(L)
    u_inv = snf.u_inv
    r = L.r
    reps = []
    for label in itertools.product(*(range(di) for di in snf.d)):
        reps.append(tuple(sum(u_inv[i][j] * label[j] for j in range(r)) for i in range(r)))
    return reps


def dual_cosets(L: IntegerLattice, cap: int | None = None) -> list[DualCosetRep]:
    """Exact-rational representatives of Z^r\\Λ*Z^r in [0,1)^r.

    Computed as adj(Λ)ᵀ·m / det with m ranging over coset reps of Z^r/ΛᵀZ^r,
    reduced mod 1; denominators always divide det_abs.
    """
    _check_cap(L.det_abs, cap)
    adj_t = tuple(zip(*L.adjugate))
    det = L.det
    r = L.r
    reps = []
    for m in enumerate_cosets(L.transpose(), cap=cap):
        coords = tuple(
            Fraction(sum(adj_t[i][j] * m[j] for j in range(r)), det) % 1 for i in range(r)
        )
        reps.append(DualCosetRep(coords))
    return reps


class RealLattice:
    """Full-rank lattice AZ^r in R^r; columns of `basis` are the generators."""

    def __init__(self, basis):
        b = np.array(basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise SingularMatrixError("basis must be square")
        det = float(np.linalg.det(b))
        if det == 0.0 or not np.isfinite(det):
            raise SingularMatrixError("singular basis: det = 0")
        b.setflags(write=False)
        self.basis = b
        self._det = det

    @property
    def r(self) -> int:
        return self.basis.shape[0]

    @property
    def volume(self) -> float:
        return abs(self._det)

    @cached_property
    def gram(self) -> np.ndarray:
        g = self.basis.T @ self.basis
        g.setflags(write=False)
        return g

    @cached_property
    def dual_basis(self) -> np.ndarray:
        d = np.linalg.inv(self.basis).T
        d.setflags(write=False)
        return d

    def dual(self) -> "RealLattice":
        return RealLattice(self.dual_basis)

    def rescaled_to_volume(self, vol: float = 1.0) -> "RealLattice":
        return RealLattice(self.basis * (vol / self.volume) ** (1.0 / self.r))


def normalize_shape(L: IntegerLattice) -> RealLattice:
    """Λ / det_abs^{1/r}: the unit-volume shape of the lattice."""
    scale = float(L.det_abs) ** (1.0 / L.r)
    return RealLattice(np.array(L.mat, dtype=float) / scale)


_SQUARE_NAMES = {"square", "square_r", "cubic", "zr"}
_HEX_NAMES = {"hexagonal_a2", "hexagonal", "hex", "a2"}
_FCC_NAMES = {"fcc_d3", "fcc", "d3", "a3"}


def named_lattice(name: str, r: int | None = None) -> RealLattice:
    """Volume-1 basis of a named lattice: square_r, hexagonal_A2 or fcc_D3."""
    key = name.strip().lower()
    if key in _SQUARE_NAMES:
        return RealLattice(np.eye(r if r is not None else 2))
    if key in _HEX_NAMES:
        basis = np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]])
        return RealLattice(basis).rescaled_to_volume()
    if key in _FCC_NAMES:
        basis = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        return RealLattice(basis).rescaled_to_volume()
    raise UnknownLatticeError(f"unknown lattice name: {name!r}")


def shortest_vector(A: RealLattice, max_r: int = 4) -> float:
    """m(L): length of the shortest nonzero vector, by exhaustive enumeration
    inside a provably sufficient coefficient box."""
    if A.r > max_r:
        raise DimensionTooLargeError(f"shortest_vector supports r <= {max_r}")
    basis = A.basis
    upper = min(np.linalg.norm(basis[:, j]) for j in range(A.r))
    inv_rows = np.linalg.inv(basis)
    # |x_i| = |(A^{-1} y)_i| <= ||row_i(A^{-1})|| * ||y||  for the minimizer y
    bounds = [int(math.floor(np.linalg.norm(inv_rows[i]) * upper + 1e-9)) for i in range(A.r)]
    best = upper
    for x in itertools.product(*(range(-b, b + 1) for b in bounds)):
        if not any(x):
            continue
        norm = float(np.linalg.norm(basis @ np.array(x, dtype=float)))
        if norm < best:
            best = norm
    return float(best)


def parse_matrix(text: str) -> IntegerLattice:
    """Parse the shared matrix syntax: rows split by ';', entries by ','."""
    rows = []
    for row_text in text.strip().split(";"):
        entries = [tok.strip() for tok in row_text.split(",")]
        try:
            rows.append([int(tok) for tok in entries])
        except ValueError as exc:
            raise SingularMatrixError(f"bad integer matrix entry in {row_text!r}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise SingularMatrixError("matrix must be square (rows ';', entries ',')")
    return IntegerLattice.from_rows(rows)


def parse_real_matrix(text: str) -> RealLattice:
    rows = []
    for row_text in text.strip().split(";"):
        try:
            rows.append([float(tok) for tok in row_text.split(",")])
        except ValueError as exc:
            raise SingularMatrixError(f"bad matrix entry in {row_text!r}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise SingularMatrixError("matrix must be square (rows ';', entries ',')")
    return RealLattice(rows)
