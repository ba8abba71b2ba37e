"""Normalized maximum likelihood code lengths for histogram models.

All code lengths are in bits.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from .geometry import Dataset2D, Partition

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CodeLength:
    data_bits: float
    model_bits: float

    @property
    def total_bits(self) -> float:
        return self.data_bits + self.model_bits


@dataclass(frozen=True)
class CompTable:
    """``log_comp[K]`` is log2 COMP(n, K) for K = 1..k_max (index 0 unused)."""

    n: int
    log_comp: np.ndarray

    @property
    def k_max(self) -> int:
        return len(self.log_comp) - 1

    def __getitem__(self, k: int) -> float:
        return float(self.log_comp[k])


def _ln_comp2(n: int) -> float:
    """Natural log of COMP(n, 2) by direct summation over the split h."""
    h = np.arange(n + 1, dtype=float)
    r = n - h
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = (
            gammaln(n + 1) - gammaln(h + 1) - gammaln(r + 1)
            + np.where(h > 0, h * np.log(h / n), 0.0)
            + np.where(r > 0, r * np.log(r / n), 0.0)
        )
    return float(logsumexp(terms))


@lru_cache(maxsize=4096)
def _ln_comp_cached(n: int, k_max: int) -> tuple[float, ...]:
    out = [0.0] * (k_max + 1)
    if n == 0 or k_max < 2:
        return tuple(out)
    out[2] = _ln_comp2(n)
    for k in range(3, k_max + 1):
        out[k] = float(np.logaddexp(out[k - 1], math.log(n / (k - 2)) + out[k - 2]))
    return tuple(out)


def log_comp(n: int, k_max: int) -> CompTable:
    """log2 COMP(n, K) for K up to ``k_max`` via the linear-time recursion.

    COMP(n, 1) = 1, COMP(n, 2) is summed directly in log-space and
    COMP(n, K) = COMP(n, K-1) + n/(K-2) * COMP(n, K-2) for K >= 3.
    COMP(0, K) = 1 for every K.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    ln = np.asarray(_ln_comp_cached(int(n), int(k_max)))
    return CompTable(int(n), ln / LN2)


def log_comp_brute(n: int, k: int) -> float:
    """log2 COMP(n, K) by enumerating every composition h_1 + ... + h_K = n.

    Exact integer arithmetic: sum of n!/prod(h!) * prod(h^h), divided by n^n.
    Only for tiny inputs (n <= 15, K <= 8).
    """
    if not (0 <= n <= 15 and 1 <= k <= 8):
        raise ValueError(f"brute-force COMP limited to n <= 15, K <= 8 (got n={n}, K={k})")
    if n == 0:
        return 0.0
    total = 0
    # stars and bars: choose K-1 bar positions among n+K-1 slots
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        hs = [edges[i + 1] - edges[i] - 1 for i in range(k)]
        coef = math.factorial(n)
        for h in hs:
            coef //= math.factorial(h)
        prod = 1
        for h in hs:
            prod *= h ** h  # 0 ** 0 == 1
        total += coef * prod
    return math.log2(total) - n * math.log2(n)


def comp_brute_2d(n: int, partition: Partition) -> float:
    """log2 of the sum of maximum likelihoods over every length-n sequence of
    lattice cells in the sample space, for the given partition.

    Independent of the multinomial formula; limited to 9 cells and n <= 4.
    """
    grid = partition.grid
    cells = grid.cells
    if cells > 9 or n > 4:
        raise ValueError(f"enumeration capped at 9 cells and n <= 4 (got {cells} cells, n={n})")
    if n == 0:
        return 0.0
    label = np.full((grid.ny, grid.nx), -1, dtype=np.int64)
    for j, reg in enumerate(partition.regions):
        for r in reg.rects:
            label[r.y0:r.y1, r.x0:r.x1] = j
    label = label.ravel()
    sizes = np.bincount(label, minlength=partition.k).astype(float)

    seqs = _sequences(cells, n)
    h = (label[seqs][:, :, None] == np.arange(partition.k)).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        # (h_j eps^2 / (n |S_j|))^h_j with |S_j| = sizes[j] cells of eps^2
        factors = np.where(h > 0, (h / (n * sizes)) ** h, 1.0)
    return math.log2(float(factors.prod(axis=1).sum()))


@lru_cache(maxsize=64)
def _sequences(cells: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(cells), repeat=n)), dtype=np.int64).reshape(-1, n)


def region_loglik(h, cells, n: int):
    """log2 of prod over points in a region of (h eps^2 / (n |S|)).

    ``cells`` is the region area in eps^2 units; empty regions contribute 0.
    Works elementwise on arrays.
    """
    h = np.asarray(h, dtype=float)
    cells = np.asarray(cells, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(h > 0, h * np.log2(h / (n * cells)), 0.0)


def data_code_length_2d(partition: Partition, data: Dataset2D, comp: CompTable | None = None) -> float:
    """NML code length of the data given the partition, using cached counts."""
    n = data.n
    if n == 0:
        return 0.0
    if any(reg.area <= 0 for reg in partition.regions):
        raise AssertionError("region with zero area")
    h = np.array([reg.count for reg in partition.regions])
    a = np.array([reg.area for reg in partition.regions])
    loglik = float(region_loglik(h, a, n).sum())
    if comp is None or comp.n != n or comp.k_max < partition.k:
        comp = log_comp(n, partition.k)
    return -loglik + comp[partition.k]


def ml_densities(partition: Partition, data: Dataset2D | int) -> np.ndarray:
    """Maximum-likelihood density per region, h_j / (n |S_j|) in real units."""
    n = data if isinstance(data, int) else data.n
    if n <= 0:
        raise ValueError("densities need at least one data point")
    eps2 = partition.grid.epsilon ** 2
    return np.array([reg.count / (n * reg.area * eps2) for reg in partition.regions])
