"""Partition-then-merge search for two-dimensional MDL histograms.

The partitioning step repeatedly splits every region along one axis with the
1-D MDL histogram of its projected points, alternating axes, until neither
axis yields a split.  The merging step then greedily fuses the pair of
neighbouring regions whose union shortens the NML code length the most.
"""
from __future__ import annotations

import heapq
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import Axis, Dataset2D, Partition, Rect, Region, shared_edges
from .hist1d import log2_binom, select_lattice
from .nml import CodeLength, data_code_length_2d, log_comp, ml_densities, region_loglik

log = logging.getLogger(__name__)

_FLIP = {"vertical": "horizontal", "horizontal": "vertical"}


@dataclass(frozen=True)
class PalmConfig:
    k_max: int = 300
    direction: Axis = "vertical"
    threads: int = 1
    check: bool = False  # recount and validate the partition after each phase

    def __post_init__(self):
        if self.k_max < 2:
            raise ValueError(f"k_max must be >= 2, got {self.k_max}")
        if self.direction not in _FLIP:
            raise ValueError(f"direction must be 'vertical' or 'horizontal', got {self.direction!r}")


@dataclass
class FitResult:
    partition: Partition
    densities: np.ndarray
    code_length: CodeLength
    trace: list = field(default_factory=list)
    pre_merge_regions: int = 0
    runtime: float = 0.0

    @property
    def total_bits(self) -> float:
        return self.code_length.total_bits


@dataclass
class _Cell:
    rect: Rect
    idx: np.ndarray          # indices of the points inside ``rect``
    stable: set = field(default_factory=set)  # axes already found not to split


def _split_cell(cell: _Cell, axis: Axis, data: Dataset2D, k_max: int):
    a = 0 if axis == "vertical" else 1
    lo, hi = cell.rect.span(a)
    coord = data.ix if a == 0 else data.iy
    z = coord[cell.idx] - lo
    res = select_lattice(z, hi - lo, k_max)
    if res.chosen_k == 1:
        return None, res
    cuts = res.chosen_offsets
    edges = np.concatenate(([lo], lo + cuts, [hi]))
    which = np.searchsorted(cuts, z, side="right")
    order = np.argsort(which, kind="stable")
    bounds = np.searchsorted(which[order], np.arange(len(edges)))
    kids = []
    for j in range(len(edges) - 1):
        r = cell.rect
        rect = Rect(int(edges[j]), int(edges[j + 1]), r.y0, r.y1) if a == 0 else \
            Rect(r.x0, r.x1, int(edges[j]), int(edges[j + 1]))
        kids.append(_Cell(rect, cell.idx[order[bounds[j]:bounds[j + 1]]]))
    return kids, res


def partition_step(data: Dataset2D, config: PalmConfig, trace: list | None = None) -> tuple[Partition, float]:
    """Alternating axis-wise MDL splits until two consecutive passes (one per
    axis) leave every region unsplit.

    Returns the rectangle partition and the code length spent on the
    accepted cut sets (sum of log2 C(E, K-1)).
    """
    grid = data.grid
    cells = [_Cell(grid.full_rect, np.arange(data.n))]
    axis = config.direction
    quiet = 0
    cut_bits = 0.0
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        while quiet < 2:
            todo = [c for c in cells if axis not in c.stable]
            if pool is not None:
                results = list(pool.map(lambda c: _split_cell(c, axis, data, config.k_max), todo))
            else:
                results = [_split_cell(c, axis, data, config.k_max) for c in todo]
            outcome = {id(c): r for c, r in zip(todo, results)}
            new_cells = []
            splits = evals = bound = capped = 0
            for c in cells:
                if id(c) not in outcome:
                    new_cells.append(c)
                    continue
                kids, res = outcome[id(c)]
                evals += res.evaluations
                bound += config.k_max * max(res.E, 1) ** 2
                if kids is None:
                    c.stable.add(axis)
                    new_cells.append(c)
                else:
                    splits += 1
                    capped += res.chosen_k == config.k_max
                    cut_bits += log2_binom(res.E, res.chosen_k - 1)
                    new_cells.extend(kids)
            cells = new_cells
            quiet = quiet + 1 if splits == 0 else 0
            if trace is not None:
                part = _cells_to_partition(cells, grid)
                trace.append({"phase": "partition", "direction": axis, "regions": len(cells),
                              "splits": splits, "capped": capped, "evaluations": int(evals),
                              "evaluation_bound": int(bound),
                              "bits": data_code_length_2d(part, data)})
            log.debug("partition pass %s: %d splits, %d regions", axis, splits, len(cells))
            axis = _FLIP[axis]
    finally:
        if pool is not None:
            pool.shutdown()
    return _cells_to_partition(cells, grid), cut_bits


def _cells_to_partition(cells, grid) -> Partition:
    return Partition(tuple(Region.of([c.rect], len(c.idx)) for c in cells), grid)


def neighbor_pairs(rects_by_label: list[tuple[Rect, int]]) -> set[tuple[int, int]]:
    """Label pairs whose rectangles share an edge of positive length."""
    return {(min(a, b), max(a, b)) for *_, a, b in shared_edges(rects_by_label)}


def merge_step(partition: Partition, data: Dataset2D, trace: list | None = None) -> Partition:
    """Greedy merging of neighbouring regions scored by the NML code length.

    A merge is accepted while the best candidate's code length (with
    COMP(n, K-1)) does not exceed the current one (with COMP(n, K)).  Equal
    candidates are resolved towards the smallest pair of region ids.
    """
    n = data.n
    k = partition.k
    if k < 2 or n == 0:
        return partition
    comp = log_comp(n, k)
    regions = {i: r for i, r in enumerate(partition.regions)}
    term = {i: float(region_loglik(r.count, r.area, n)) for i, r in regions.items()}
    nbrs: dict[int, set] = {i: set() for i in regions}
    for a, b in neighbor_pairs([(rect, i) for i, r in regions.items() for rect in r.rects]):
        nbrs[a].add(b)
        nbrs[b].add(a)

    def gain(a, b):
        ra, rb = regions[a], regions[b]
        joint = float(region_loglik(ra.count + rb.count, ra.area + rb.area, n))
        return joint - term[a] - term[b]

    heap = [(-gain(a, b), a, b) for a in sorted(nbrs) for b in sorted(nbrs[a]) if a < b]
    heapq.heapify(heap)
    neg_ll = -sum(term.values())
    next_id = len(regions)
    while k > 1:
        while heap and (heap[0][1] not in regions or heap[0][2] not in regions):
            heapq.heappop(heap)
        if not heap:
            break
        neg_gain, a, b = heap[0]
        candidate = neg_ll + neg_gain + comp[k - 1]
        current = neg_ll + comp[k]
        if candidate > current:
            break
        heapq.heappop(heap)
        merged = regions[a].merged(regions[b])
        c = next_id
        next_id += 1
        joined = (nbrs.pop(a) | nbrs.pop(b)) - {a, b}
        for x in joined:
            nbrs[x].discard(a)
            nbrs[x].discard(b)
            nbrs[x].add(c)
        del regions[a], regions[b]
        regions[c] = merged
        term[c] = float(region_loglik(merged.count, merged.area, n))
        nbrs[c] = joined
        for x in sorted(joined):
            heapq.heappush(heap, (-gain(x, c), x, c))
        neg_ll += neg_gain
        k -= 1
        if trace is not None:
            trace.append({"phase": "merge", "regions": k, "bits": neg_ll + comp[k],
                          "merged": [a, b]})
    ordered = sorted(regions.values(), key=lambda r: r.rects[0])
    return Partition(tuple(ordered), partition.grid)


def palm_fit(data: Dataset2D, config: PalmConfig = PalmConfig()) -> FitResult:
    """Fit a two-dimensional MDL histogram to ``data`` on its grid."""
    t0 = time.perf_counter()
    trace: list = []
    part, cut_bits = partition_step(data, config, trace)
    if config.check:
        part.validate(data)
    k0 = part.k
    merged = merge_step(part, data, trace)
    if config.check:
        merged.validate(data)
    bits = data_code_length_2d(merged, data)
    dens = ml_densities(merged, data) if data.n else np.full(merged.k, 1.0 / (merged.grid.cells * merged.grid.epsilon ** 2))
    return FitResult(merged, dens, CodeLength(bits, cut_bits), trace, k0, time.perf_counter() - t0)
