"""Evaluation against a known truth: MISE, boundary losses and a fixed-grid
baseline."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Dataset2D, GridSpec, Partition, Rect, Region, count_points, label_rows, shared_edges
from .nml import ml_densities

DEFAULT_PIXEL = 0.01


@dataclass(frozen=True)
class PixelSet:
    """Centres of the pixels covering the inner boundaries of a partition."""

    pixel_size: float
    points: np.ndarray  # (m, 2) real coordinates

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class EvalReport:
    mise: float
    l_learn: float
    l_true: float
    region_count_learned: int
    region_count_true: int | None
    runtime: float = 0.0
    l_true_undefined: bool = False  # learned boundary empty, truth not
    # per-pixel means: an extension, the losses above are plain sums
    l_learn_mean: float = 0.0
    l_true_mean: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float) and math.isinf(v):
                d[k] = "inf"
        return d


def _painted_rows(partition: Partition, values: np.ndarray, grid: GridSpec, r0: int, r1: int) -> np.ndarray:
    """``values`` of ``partition`` painted on rows ``[r0, r1)`` of ``grid``."""
    pg = partition.grid
    if pg.epsilon != grid.epsilon:
        raise ValueError("estimate and truth must share the lattice")
    dx, dy = pg.origin[0] - grid.origin[0], pg.origin[1] - grid.origin[1]
    out = np.zeros((r1 - r0, grid.nx))
    lo, hi = max(r0, dy), min(r1, dy + pg.ny)
    if hi > lo:
        lab = label_rows(partition, lo - dy, hi - dy)
        x_lo, x_hi = max(0, dx), min(grid.nx, dx + pg.nx)
        out[lo - r0:hi - r0, x_lo:x_hi] = np.asarray(values)[lab[:, x_lo - dx:x_hi - dx]]
    return out


def mise_single(truth, partition: Partition, densities, rows: int = 256) -> float:
    """Integrated squared error by the midpoint rule on the lattice cells of
    the truth's sample space.  The estimate is zero outside its own grid."""
    grid = truth.grid
    total = 0.0
    for r0 in range(0, grid.ny, rows):
        r1 = min(r0 + rows, grid.ny)
        diff = truth.density_rows(r0, r1) - _painted_rows(partition, densities, grid, r0, r1)
        total += float(np.einsum("ij,ij->", diff, diff))
    return total * grid.epsilon ** 2


def boundary_pixels(partition: Partition, pixel_size: float = DEFAULT_PIXEL) -> PixelSet:
    """Pixel centres along every inner boundary segment.

    Each boundary line is cut into pixels of ``pixel_size`` anchored at the
    grid origin; a pixel is emitted once if any part of it separates two
    different regions.  The outer boundary of the sample space never counts.
    """
    g = partition.grid
    step = pixel_size / g.epsilon
    p = int(round(step))
    if p < 1 or abs(step - p) > 1e-9 * max(1.0, step):
        raise ValueError("pixel_size must be a positive multiple of epsilon")
    labelled = [(r, j) for j, reg in enumerate(partition.regions) for r in reg.rects]
    keys = set()
    for axis, pos, lo, hi, _, _ in shared_edges(labelled):
        for k in range(lo // p, -(-hi // p)):
            keys.add((axis, pos, k))
    if not keys:
        return PixelSet(pixel_size, np.zeros((0, 2)))
    arr = np.array(sorted(keys), dtype=np.int64)
    along = (arr[:, 2] + 0.5) * p
    across = arr[:, 1].astype(float)
    # axis 0 edges are vertical lines x = pos
    lx = np.where(arr[:, 0] == 0, across, along)
    ly = np.where(arr[:, 0] == 0, along, across)
    pts = np.column_stack([(lx + g.origin[0]) * g.epsilon, (ly + g.origin[1]) * g.epsilon])
    return PixelSet(pixel_size, pts)


def _directed(src: np.ndarray, dst: np.ndarray) -> float:
    d, _ = cKDTree(dst).query(src, k=1)
    return float(np.sum(d * d))


def boundary_losses(learned: PixelSet, truth: PixelSet) -> tuple[float, float]:
    """``(l_learn, l_true)``: summed squared nearest-pixel distances from the
    learned pixels to the true ones and back.

    If one side is empty and the other is not, the loss measured from the
    non-empty side is +inf and the other is 0.
    """
    a, b = np.asarray(learned.points), np.asarray(truth.points)
    if len(a) == 0 and len(b) == 0:
        return 0.0, 0.0
    if len(a) == 0:
        return 0.0, math.inf
    if len(b) == 0:
        return math.inf, 0.0
    return _directed(a, b), _directed(b, a)


def grid_shape(target: int) -> tuple[int, int]:
    """Columns and rows of the most-square grid with at least ``target`` cells.

    Among shapes with |a - b| <= 1 the one with the fewest cells wins; for a
    tie the wider one (more columns) is taken.
    """
    if target < 1:
        raise ValueError("target must be >= 1")
    k = math.isqrt(target - 1) + 1  # ceil(sqrt(target))
    if k * (k - 1) >= target:
        return k, k - 1
    return k, k


def _even_cuts(length: int, parts: int) -> list[int]:
    if parts > length:
        raise ValueError(f"cannot cut {length} lattice cells into {parts} parts")
    return [(i * length * 2 + parts) // (2 * parts) for i in range(parts + 1)]


def fixed_grid(data: Dataset2D, target: int) -> tuple[Partition, np.ndarray]:
    """Equally spaced grid with about ``target`` cells and ML densities.

    Cut lines are rounded to the lattice (half up).
    """
    grid = data.grid
    a, b = grid_shape(target)
    xs, ys = _even_cuts(grid.nx, a), _even_cuts(grid.ny, b)
    regs = []
    for i in range(a):
        for j in range(b):
            reg = Region.of([Rect(xs[i], xs[i + 1], ys[j], ys[j + 1])])
            regs.append(Region.of(reg.rects, count_points(reg, data)))
    part = Partition(tuple(regs), grid)
    dens = ml_densities(part, data) if data.n else np.full(part.k, 1 / (grid.cells * grid.epsilon ** 2))
    return part, dens


def truth_pixels(truth, pixel_size: float = DEFAULT_PIXEL) -> PixelSet:
    """Boundary pixels of a ground truth.  Curved boundaries are sampled at
    ``pixel_size`` spacing along x."""
    if truth.partition is not None:
        return boundary_pixels(truth.partition, pixel_size)
    if truth.kind == "sine":
        from .synth import sine_curve
        x = np.arange(0.5, round(1 / pixel_size)) * pixel_size
        return PixelSet(pixel_size, np.column_stack([x, sine_curve(x, truth.m)]))
    raise ValueError(f"no boundary for truth kind {truth.kind!r}")


def evaluate(truth, partition: Partition, densities, pixel_size: float = DEFAULT_PIXEL,
             runtime: float = 0.0) -> EvalReport:
    mise = mise_single(truth, partition, densities)
    try:
        tp = truth_pixels(truth, pixel_size)
    except ValueError:
        tp = None
    if tp is None:
        l_learn = l_true = math.nan
        mean_l = mean_t = math.nan
    else:
        lp = boundary_pixels(partition, pixel_size)
        l_learn, l_true = boundary_losses(lp, tp)
        mean_l = l_learn / len(lp) if len(lp) else 0.0
        mean_t = l_true / len(tp) if len(tp) else 0.0
    return EvalReport(
        mise=mise, l_learn=l_learn, l_true=l_true,
        region_count_learned=partition.k,
        region_count_true=truth.partition.k if truth.partition is not None else None,
        runtime=runtime,
        l_true_undefined=tp is not None and math.isinf(l_true),
        l_learn_mean=mean_l, l_true_mean=mean_t)
