"""One-dimensional MDL histograms on a fixed epsilon lattice.

For every number of bins K the maximum-likelihood cut set is found by dynamic
programming over the pruned candidate positions; the NML complexity and the
data-independent cut encoding log2 C(E, K-1) are added afterwards and the K
with the shortest total code length wins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import gammaln

from .geometry import _TIE_SLACK
from .nml import LN2, log_comp


@dataclass(frozen=True)
class Extent1D:
    lo: float
    hi: float
    epsilon: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError(f"empty extent [{self.lo}, {self.hi}]")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def cells(self) -> float:
        return (self.hi - self.lo) / self.epsilon

    @property
    def lattice(self) -> tuple[int, float]:
        """Whole lattice cells inside the extent and the leftover fraction."""
        q = self.cells
        whole = int(math.floor(q + _TIE_SLACK * max(1.0, q)))
        frac = q - whole
        if abs(frac) <= _TIE_SLACK * max(1.0, q):
            frac = 0.0
        return whole, frac

    @property
    def E(self) -> int:
        whole, frac = self.lattice
        return whole if frac > 0 else whole - 1


@dataclass(frozen=True)
class DpResult:
    """Per-K optima and the MDL choice.

    Arrays are indexed by K (index 0 unused).  Cut positions are lattice
    offsets from the extent's lower bound; :meth:`cuts` converts to reals.
    """

    per_k_offsets: tuple
    per_k_loglik: np.ndarray
    total_bits: np.ndarray
    chosen_k: int
    n: int
    E: int
    evaluations: int
    extent: Extent1D | None = None

    @property
    def best_total(self) -> float:
        return float(self.total_bits[self.chosen_k])

    @property
    def chosen_offsets(self) -> np.ndarray:
        return self.per_k_offsets[self.chosen_k]

    def cuts(self, k: int | None = None) -> np.ndarray:
        k = self.chosen_k if k is None else k
        off = self.per_k_offsets[k]
        if off is None:
            return None
        return self.extent.lo + off * self.extent.epsilon


def log2_binom(E: int, k: int) -> float:
    if k < 0 or k > E:
        return math.inf
    return float((gammaln(E + 1) - gammaln(k + 1) - gammaln(E - k + 1)) / LN2)


def retained_offsets(z_off: np.ndarray, whole: int, frac: float = 0.0) -> np.ndarray:
    """Interior candidate offsets kept by the empty-gap rule.

    A candidate c is dropped when two other candidates a < c < b enclose a
    stretch [a, b] without data; the tightest such pair is (c-1, c+1).
    """
    last = whole if frac > 0 else whole - 1
    if last < 1:
        return np.zeros(0, dtype=np.int64)
    occ = np.bincount(np.asarray(z_off, dtype=np.int64), minlength=whole + 2)[: whole + 2] > 0
    c = np.arange(1, last + 1)
    near = occ[c - 1] | occ[c] | occ[np.minimum(c + 1, whole + 1)]
    keep = near | (c == 1) | (c == last)
    return c[keep]


def _offsets(z, extent: Extent1D) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    q = (z - extent.lo) / extent.epsilon
    off = np.floor(q + 0.5 + _TIE_SLACK * np.maximum(1.0, np.abs(q))).astype(np.int64)
    whole, frac = extent.lattice
    if frac > 0:
        # values in the trailing partial cell belong to the last bin
        off = np.minimum(off, whole)
    if off.size and (off.min() < 0 or off.max() > whole):
        raise ValueError("data outside the extent")
    return off


def candidate_cuts(z, extent: Extent1D) -> np.ndarray:
    """Retained candidate cut positions (reals) for data ``z`` on ``extent``."""
    off = _offsets(z, extent)
    if off.size == 0:
        return np.zeros(0)
    whole, frac = extent.lattice
    return extent.lo + retained_offsets(off, whole, frac) * extent.epsilon


@numba.njit(cache=True, nogil=True)
def _dp_kernel(bpos, cum, n, k_max, lg_int, frac):
    nb = bpos.shape[0]
    last = nb - 1
    kk = min(k_max, last)
    neg = -np.inf
    f = np.full((kk + 1, nb), neg)
    parent = np.full((kk + 1, nb), -1, dtype=np.int32)
    lgn = lg_int[n]
    evals = 0
    for j in range(1, nb):
        h = cum[j] - cum[0]
        if h > 0:
            w = bpos[j] - bpos[0]
            lw = math.log2(w + frac) if (j == last and frac > 0.0) else lg_int[w]
            f[1, j] = h * (lg_int[h] - lgn - lw)
        else:
            f[1, j] = 0.0
        evals += 1
    for k in range(2, kk + 1):
        j_lo = k if k < kk else last
        for j in range(j_lo, nb):
            best = neg
            arg = -1
            cj = cum[j]
            bj = bpos[j]
            partial = j == last and frac > 0.0
            for i in range(k - 1, j):
                h = cj - cum[i]
                if h > 0:
                    w = bj - bpos[i]
                    lw = math.log2(w + frac) if partial else lg_int[w]
                    v = f[k - 1, i] + h * (lg_int[h] - lgn - lw)
                else:
                    v = f[k - 1, i]
                if v > best:
                    best = v
                    arg = i
            f[k, j] = best
            parent[k, j] = arg
            evals += j - k + 1
    return f[:, last].copy(), parent, evals


def dp_lattice(z_off: np.ndarray, whole: int, k_max: int, frac: float = 0.0,
               prune: bool = True) -> DpResult:
    """Likelihood-maximizing cut sets for K = 1..k_max on lattice offsets.

    ``z_off`` are data offsets in [0, whole]; interior candidates are the
    offsets 1..E.  ``total_bits`` is left at +inf; see :func:`select_lattice`.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    z_off = np.asarray(z_off, dtype=np.int64)
    n = int(z_off.size)
    E = whole if frac > 0 else whole - 1
    if prune:
        cand = retained_offsets(z_off, whole, frac) if n else np.zeros(0, dtype=np.int64)
    else:
        cand = np.arange(1, E + 1, dtype=np.int64)
    loglik = np.full(k_max + 1, -np.inf)
    loglik[0] = np.nan
    offsets = [None] * (k_max + 1)
    offsets[1] = np.zeros(0, dtype=np.int64)
    if n == 0:
        # every cut set has likelihood 1; the leftmost ones are reported
        for k in range(1, min(k_max, len(cand) + 1) + 1):
            loglik[k] = 0.0
            offsets[k] = cand[: k - 1].copy()
        return DpResult(tuple(offsets), loglik, np.full(k_max + 1, np.inf), 1, 0, E, 0)

    bpos = np.concatenate(([0], cand, [whole])).astype(np.int64)
    counts = np.bincount(z_off, minlength=whole + 1)
    below = np.concatenate(([0], np.cumsum(counts)))  # below[b] = #(z < b)
    cum = below[bpos].astype(np.int64)
    cum[-1] = n
    lg_int = np.zeros(max(n, whole) + 2)
    lg_int[1:] = np.log2(np.arange(1, lg_int.size))
    f_last, parent, evals = _dp_kernel(bpos, cum, n, k_max, lg_int, float(frac))

    last = len(bpos) - 1
    for k in range(1, len(f_last)):
        loglik[k] = f_last[k]
        cuts = []
        j = last
        for kk in range(k, 1, -1):
            j = int(parent[kk, j])
            cuts.append(int(bpos[j]))
        offsets[k] = np.array(cuts[::-1], dtype=np.int64)
    return DpResult(tuple(offsets), loglik, np.full(k_max + 1, np.inf), 1, n, E, int(evals))


def select_lattice(z_off: np.ndarray, whole: int, k_max: int, frac: float = 0.0,
                   prune: bool = True) -> DpResult:
    """MDL histogram on lattice offsets: add COMP and cut-encoding bits per K."""
    res = dp_lattice(z_off, whole, k_max, frac, prune)
    n, E = res.n, res.E
    comp = log_comp(n, k_max)
    total = np.full(k_max + 1, np.inf)
    for k in range(1, k_max + 1):
        if np.isfinite(res.per_k_loglik[k]) and k - 1 <= E:
            total[k] = -res.per_k_loglik[k] + comp[k] + log2_binom(E, k - 1)
    chosen = 1
    for k in range(2, k_max + 1):
        if total[k] < total[chosen]:
            chosen = k
    return DpResult(res.per_k_offsets, res.per_k_loglik, total, chosen, n, E, res.evaluations)


def dp_best_cuts(z, extent: Extent1D, k_max: int, prune: bool = True) -> DpResult:
    whole, frac = extent.lattice
    res = dp_lattice(_offsets(z, extent), whole, k_max, frac, prune)
    return _with_extent(res, extent)


def select_mdl_histogram(z, extent: Extent1D, k_max: int, prune: bool = True) -> DpResult:
    """MDL-optimal histogram of ``z`` over ``extent`` with at most ``k_max`` bins.

    Ties in total code length go to the smaller K.
    """
    whole, frac = extent.lattice
    res = select_lattice(_offsets(z, extent), whole, k_max, frac, prune)
    return _with_extent(res, extent)


def _with_extent(res: DpResult, extent: Extent1D) -> DpResult:
    return DpResult(res.per_k_offsets, res.per_k_loglik, res.total_bits, res.chosen_k,
                    res.n, res.E, res.evaluations, extent)
