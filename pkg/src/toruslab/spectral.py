"""Cayley-graph Laplacian of a discrete torus, its closed-form spectrum, and
exact spanning-tree counts via fraction-free elimination."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import CapExceededError
from .lattices import DualCosetRep, IntegerLattice, coset_cap, coset_labeller, dual_cosets

EXACT_DET_CAP = 1500
FLOAT_PATH_CAP = 10**7


@dataclass(frozen=True)
class TorusLaplacian:
    """Multigraph Laplacian: each of the 2r generators ±e_k contributes one
    edge, so parallel edges (and loops, which drop out) arise for small
    quotients.  `rows` holds the sparse integer entries."""

    size: int
    rows: tuple[dict, ...]
    generator_multiset: tuple[tuple[int, ...], ...]

    def dense(self) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=object)
        for i, row in enumerate(self.rows):
            for j, val in row.items():
                out[i, j] = val
        return out


@dataclass(frozen=True)
class SpectrumSummary:
    """Eigenvalue multiset of the torus Laplacian, indexed by dual cosets."""

    eigen_pairs: tuple  # (DualCosetRep, float eigenvalue)
    zero_multiplicity: int

    @property
    def values(self) -> list[float]:
        return [lam for _, lam in self.eigen_pairs]


@dataclass(frozen=True)
class TreeCount:
    tau: int
    det_star: int
    lattice: IntegerLattice


def build_laplacian(L: IntegerLattice, cap: int | None = None) -> TorusLaplacian:
    """Assemble the Laplacian of ΛZ^r\\Z^r with generators ±e_1..±e_r."""
    n = L.det_abs
    limit = cap if cap is not None else coset_cap()
    if n > limit:
        raise CapExceededError(f"{n} vertices exceeds cap {limit}")
    r = L.r
    d, label = coset_labeller(L)
    index = {
        lab: idx for idx, lab in enumerate(itertools.product(*(range(di) for di in d)))
    }

    gens = []
    for k in range(r):
        e = [0] * r
        e[k] = 1
        gens.append(tuple(e))
        gens.append(tuple(-x for x in e))

    # generator translations in SNF label coordinates
    gen_labels = [label(g) for g in gens]
    rows = [dict() for _ in range(n)]
    for lab, i in index.items():
        diag = 0
        row = rows[i]
        for gl in gen_labels:
            target = tuple((lab[k] + gl[k]) % d[k] for k in range(r))
            if target == lab:
                continue  # loop edge: contributes nothing
            j = index[target]
            row[j] = row.get(j, 0) - 1
            diag += 1
        if diag:
            row[i] = diag
    return TorusLaplacian(size=n, rows=tuple(rows), generator_multiset=tuple(gens))


@lru_cache(maxsize=32)
def _dual_data(L: IntegerLattice):
    return tuple(dual_cosets(L))


def eigenvalue_of(v: DualCosetRep) -> float:
    """λ_v = 4 Σ_k sin²(π v_k), folding v_k to [0,1/2] for accuracy near 0."""
    total = 0.0
    for q in v.coords:
        w = q if q <= Fraction(1, 2) else 1 - q
        s = math.sin(math.pi * float(w))
        total += 4.0 * s * s
    return total


def eigenvalues(L: IntegerLattice, cap: int | None = None) -> SpectrumSummary:
    """Closed-form spectrum over the dual cosets; exactly one zero eigenvalue."""
    limit = cap if cap is not None else coset_cap()
    if L.det_abs > limit:
        raise CapExceededError(f"{L.det_abs} eigenvalues exceeds cap {limit}")
    pairs = []
    zero_mult = 0
    for v in _dual_data(L):
        if all(q == 0 for q in v.coords):
            lam = 0.0
            zero_mult += 1
        else:
            lam = eigenvalue_of(v)
        pairs.append((v, lam))
    return SpectrumSummary(eigen_pairs=tuple(pairs), zero_multiplicity=zero_mult)


def _bareiss_sparse_det(rows: list[dict], n: int) -> int:
    """Determinant by fraction-free (Bareiss) elimination on sparse rows.

    Two refinements keep this near-linear on banded matrices: a column index
    so only rows with a nonzero in the pivot column are visited, and lazy row
    scaling — a row untouched since step e differs from its true step-k value
    only by the exact factor P[k]/P[e], applied when the row is next used.
    """
    if n == 0:
        return 1
    sign = 1
    epoch = [0] * n
    P = [1]  # P[k] = pivot produced by step k-1
    col_rows = [set() for _ in range(n)]  # rows with a (structurally) nonzero entry per column
    for i, row in enumerate(rows):
        for j in row:
            col_rows[j].add(i)

    def materialize(i, k):
        e = epoch[i]
        if e == k:
            return
        num, den = P[k], P[e]
        row = rows[i]
        for j in list(row):
            q, rem = divmod(row[j] * num, den)
            if rem:
                raise ArithmeticError("non-exact division in Bareiss step")
            row[j] = q
        epoch[i] = k

    for k in range(n):
        if k not in rows[k]:
            cands = [i for i in col_rows[k] if i > k]
            if not cands:
                return 0
            i = min(cands)
            k_keys, i_keys = set(rows[k]), set(rows[i])
            for j in k_keys - i_keys:
                col_rows[j].discard(k)
                col_rows[j].add(i)
            for j in i_keys - k_keys:
                col_rows[j].discard(i)
                col_rows[j].add(k)
            rows[k], rows[i] = rows[i], rows[k]
            epoch[k], epoch[i] = epoch[i], epoch[k]
            sign = -sign
        materialize(k, k)
        piv = rows[k][k]
        denom = P[k]
        rk = rows[k]
        for i in sorted(col_rows[k]):
            if i <= k:
                continue
            materialize(i, k)
            ri = rows[i]
            aik = ri[k]
            new = {}
            for j, rkj in rk.items():
                if j <= k:
                    continue
                q, rem = divmod(piv * ri.get(j, 0) - aik * rkj, denom)
                if rem:
                    raise ArithmeticError("non-exact division in Bareiss step")
                if q:
                    new[j] = q
            for j, rij in ri.items():
                if j <= k or j in rk:
                    continue
                q, rem = divmod(piv * rij, denom)
                if rem:
                    raise ArithmeticError("non-exact division in Bareiss step")
                if q:
                    new[j] = q
            for j in ri:
                if j > k and j not in new:
                    col_rows[j].discard(i)
            for j in new:
                if j not in ri:
                    col_rows[j].add(i)
            rows[i] = new
            epoch[i] = k + 1
        P.append(piv)
    return sign * P[n]


def _cofactor_rows(lap: TorusLaplacian, drop: int = 0) -> list[dict]:
    """Sparse rows of the Laplacian with row/column `drop` removed, reordered
    by reverse Cuthill-McKee when the natural bandwidth is loose."""
    n = lap.size
    m = n - 1
    if m == 0:
        return []
    pos = lambda v: v if v < drop else v - 1
    band = 0
    for i in range(n):
        if i == drop:
            continue
        for j in lap.rows[i]:
            if j != drop:
                band = max(band, abs(pos(i) - pos(j)))
    if band <= 16:
        rows = [dict() for _ in range(m)]
        for i in range(n):
            if i == drop:
                continue
            rows[pos(i)] = {pos(j): val for j, val in lap.rows[i].items() if j != drop}
        return rows
    ri, ci = [], []
    for i in range(n):
        if i == drop:
            continue
        for j in lap.rows[i]:
            if j != drop:
                ri.append(pos(i))
                ci.append(pos(j))
    graph = scipy.sparse.csr_matrix((np.ones(len(ri), dtype=np.int8), (ri, ci)), shape=(m, m))
    perm = reverse_cuthill_mckee(graph, symmetric_mode=True)
    inv = np.empty(m, dtype=int)
    inv[perm] = np.arange(m)
    rows = [dict() for _ in range(m)]
    for i in range(n):
        if i == drop:
            continue
        target = rows[int(inv[pos(i)])]
        for j, val in lap.rows[i].items():
            if j != drop:
                target[int(inv[pos(j)])] = val
    return rows


def count_spanning_trees(L: IntegerLattice, cap: int = EXACT_DET_CAP) -> TreeCount:
    """Exact complexity τ: a cofactor of the Laplacian by Bareiss elimination.
    Degenerate single-vertex quotient counts as τ = 1."""
    n = L.det_abs
    if n > cap:
        raise CapExceededError(f"exact tree count capped at {cap} vertices (got {n})")
    if n == 1:
        return TreeCount(tau=1, det_star=1, lattice=L)
    lap = build_laplacian(L)
    rows = _cofactor_rows(lap, drop=0)
    tau = _bareiss_sparse_det(rows, n - 1)
    return TreeCount(tau=tau, det_star=tau * n, lattice=L)


def cofactor(L: IntegerLattice, drop: int, cap: int = EXACT_DET_CAP) -> int:
    """Any single cofactor of the Laplacian (they are all equal to τ)."""
    n = L.det_abs
    if n > cap:
        raise CapExceededError(f"exact cofactor capped at {cap} vertices (got {n})")
    if n == 1:
        return 1
    lap = build_laplacian(L)
    return _bareiss_sparse_det(_cofactor_rows(lap, drop=drop), n - 1)


def _pairwise_sum(values: list[float]) -> float:
    """Deterministic pairwise tree reduction (values already ordered)."""
    work = values
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            nxt.append(work[i] + work[i + 1])
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0] if work else 0.0


def log_det_star_float(L: IntegerLattice, cap: int = FLOAT_PATH_CAP) -> float:
    """Σ_{v≠0} log λ_v with ascending sort and pairwise-tree summation."""
    if L.det_abs > cap:
        raise CapExceededError(f"float spectrum capped at {cap} (got {L.det_abs})")
    spec = eigenvalues(L, cap=cap)
    logs = sorted(math.log(lam) for lam in spec.values if lam != 0.0)
    return _pairwise_sum(logs)
