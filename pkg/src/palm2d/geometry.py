"""Lattice geometry: grids, datasets, rectangles, regions and partitions.

Every coordinate is stored as an integer offset from the grid origin in units
of the precision ``epsilon``.  Floats only appear at the boundary (input
points, reported coordinates).  Containment is half-open (closed on the
left/bottom, open on the right/top) except along the right and top edge of
the sample space, which are closed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

Axis = Literal["vertical", "horizontal"]

# Relative slack applied before flooring so that decimal ties such as
# 0.0005 / 0.001 (== 0.49999...) still round half-up.
_TIE_SLACK = 1e-9


class OutOfBoundsError(ValueError):
    """Raised when snapped points fall outside the sample space."""

    def __init__(self, indices: Sequence[int]):
        self.indices = list(indices)
        shown = ", ".join(str(i) for i in self.indices[:20])
        more = "" if len(self.indices) <= 20 else f" (+{len(self.indices) - 20} more)"
        super().__init__(f"{len(self.indices)} point(s) outside sample space: {shown}{more}")


def to_lattice(values, epsilon: float) -> np.ndarray:
    """Round real coordinates to the nearest multiple of ``epsilon`` (ties up)."""
    q = np.asarray(values, dtype=float) / epsilon
    return np.floor(q + 0.5 + _TIE_SLACK * np.maximum(1.0, np.abs(q))).astype(np.int64)


@dataclass(frozen=True)
class GridSpec:
    """Sample space ``S`` on the epsilon lattice.

    ``origin`` is the lower-left corner and ``shape`` the width/height, both in
    lattice units (multiples of ``epsilon`` on the absolute lattice).
    """

    epsilon: float
    origin: tuple[int, int]
    shape: tuple[int, int]

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.shape[0] <= 0 or self.shape[1] <= 0:
            raise ValueError(f"extent must be positive, got {self.shape}")
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))

    @classmethod
    def from_bounds(cls, x0: float, y0: float, x1: float, y1: float, epsilon: float) -> "GridSpec":
        lo = to_lattice([x0, y0], epsilon)
        hi = to_lattice([x1, y1], epsilon)
        return cls(epsilon, (int(lo[0]), int(lo[1])), (int(hi[0] - lo[0]), int(hi[1] - lo[1])))

    @property
    def nx(self) -> int:
        return self.shape[0]

    @property
    def ny(self) -> int:
        return self.shape[1]

    @property
    def cells(self) -> int:
        return self.nx * self.ny

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        e = self.epsilon
        ox, oy = self.origin
        return (ox * e, oy * e, (ox + self.nx) * e, (oy + self.ny) * e)

    @property
    def full_rect(self) -> "Rect":
        return Rect(0, self.nx, 0, self.ny)

    def to_coord(self, i, axis: int = 0):
        """Lattice offset(s) along ``axis`` (0=x, 1=y) to real coordinates."""
        return (np.asarray(i) + self.origin[axis]) * self.epsilon


@dataclass(frozen=True, order=True)
class Rect:
    """Axis-aligned lattice rectangle ``[x0, x1) x [y0, y1)`` in grid offsets."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def span(self, axis: int) -> tuple[int, int]:
        return (self.x0, self.x1) if axis == 0 else (self.y0, self.y1)

    def contains(self, ix: np.ndarray, iy: np.ndarray, grid: GridSpec) -> np.ndarray:
        """Boolean mask of lattice points inside the rectangle."""
        right = (ix < self.x1) | ((self.x1 == grid.nx) & (ix == grid.nx))
        top = (iy < self.y1) | ((self.y1 == grid.ny) & (iy == grid.ny))
        return (ix >= self.x0) & right & (iy >= self.y0) & top


@dataclass(frozen=True)
class Region:
    """A union of interior-disjoint rectangles with cached area and count."""

    rects: tuple[Rect, ...]
    area: int
    count: int

    @classmethod
    def of(cls, rects: Iterable[Rect], count: int = 0) -> "Region":
        rects = tuple(sorted(rects))
        if not rects:
            raise ValueError("a region needs at least one rectangle")
        return cls(rects, sum(r.area for r in rects), int(count))

    def merged(self, other: "Region") -> "Region":
        return Region.of(self.rects + other.rects, self.count + other.count)

    def contains(self, ix: np.ndarray, iy: np.ndarray, grid: GridSpec) -> np.ndarray:
        mask = np.zeros(np.shape(ix), dtype=bool)
        for r in self.rects:
            mask |= r.contains(ix, iy, grid)
        return mask


@dataclass(frozen=True)
class Dataset2D:
    """Points snapped to the lattice of ``grid``, stored as integer offsets."""

    grid: GridSpec
    ix: np.ndarray
    iy: np.ndarray

    def __post_init__(self):
        ix = np.ascontiguousarray(self.ix, dtype=np.int64)
        iy = np.ascontiguousarray(self.iy, dtype=np.int64)
        if ix.shape != iy.shape or ix.ndim != 1:
            raise ValueError("ix and iy must be 1-D arrays of equal length")
        bad = (ix < 0) | (ix > self.grid.nx) | (iy < 0) | (iy > self.grid.ny)
        if bad.any():
            raise OutOfBoundsError(np.flatnonzero(bad).tolist())
        ix.setflags(write=False)
        iy.setflags(write=False)
        object.__setattr__(self, "ix", ix)
        object.__setattr__(self, "iy", iy)

    @property
    def n(self) -> int:
        return int(self.ix.size)

    @property
    def points(self) -> np.ndarray:
        """Real coordinates as an ``(n, 2)`` array."""
        return np.column_stack([self.grid.to_coord(self.ix, 0), self.grid.to_coord(self.iy, 1)])

    @classmethod
    def empty(cls, grid: GridSpec) -> "Dataset2D":
        return cls(grid, np.zeros(0, np.int64), np.zeros(0, np.int64))


@dataclass(frozen=True)
class Partition:
    regions: tuple[Region, ...]
    grid: GridSpec
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def k(self) -> int:
        return len(self.regions)

    @classmethod
    def whole(cls, grid: GridSpec, n: int = 0) -> "Partition":
        return cls((Region.of([grid.full_rect], n),), grid)

    def validate(self, data: Dataset2D | None = None) -> None:
        """Check the partition invariants; raises AssertionError on violation."""
        total = sum(r.area for r in self.regions)
        assert total == self.grid.cells, f"areas sum to {total}, expected {self.grid.cells}"
        for reg in self.regions:
            assert reg.area == sum(r.area for r in reg.rects), "stale cached area"
        cover = np.zeros((self.grid.ny, self.grid.nx), dtype=np.int32) if self.grid.cells <= 4_000_000 else None
        if cover is not None:
            for reg in self.regions:
                for r in reg.rects:
                    cover[r.y0:r.y1, r.x0:r.x1] += 1
            assert (cover == 1).all(), "regions overlap or leave gaps"
        if data is not None:
            counts = [count_points(reg, data) for reg in self.regions]
            assert counts == [reg.count for reg in self.regions], "stale cached counts"
            assert sum(counts) == data.n


def snap_to_grid(raw_points, grid: GridSpec) -> Dataset2D:
    """Round raw ``(x, y)`` pairs onto the lattice of ``grid``.

    Raises :class:`OutOfBoundsError` naming every point that lands outside
    the sample space after rounding.
    """
    pts = np.asarray(raw_points, dtype=float).reshape(-1, 2)
    if not np.isfinite(pts).all():
        raise ValueError("non-finite coordinates")
    ix = to_lattice(pts[:, 0], grid.epsilon) - grid.origin[0]
    iy = to_lattice(pts[:, 1], grid.epsilon) - grid.origin[1]
    bad = (ix < 0) | (ix > grid.nx) | (iy < 0) | (iy > grid.ny)
    if bad.any():
        raise OutOfBoundsError(np.flatnonzero(bad).tolist())
    return Dataset2D(grid, ix, iy)


def bounding_grid(raw_points, epsilon: float) -> GridSpec:
    """Smallest lattice-aligned rectangle covering the points.

    Degenerate directions (all points on one line) are widened by one cell.
    """
    pts = np.asarray(raw_points, dtype=float).reshape(-1, 2)
    if pts.size == 0:
        return GridSpec(epsilon, (0, 0), (1, 1))
    lo = to_lattice(pts.min(axis=0), epsilon)
    hi = to_lattice(pts.max(axis=0), epsilon)
    shape = np.maximum(hi - lo, 1)
    return GridSpec(epsilon, (int(lo[0]), int(lo[1])), (int(shape[0]), int(shape[1])))


def count_points(region: Region, data: Dataset2D) -> int:
    return int(region.contains(data.ix, data.iy, data.grid).sum())


def _touch(a: Rect, b: Rect) -> bool:
    if a.x1 == b.x0 or b.x1 == a.x0:
        return min(a.y1, b.y1) - max(a.y0, b.y0) > 0
    if a.y1 == b.y0 or b.y1 == a.y0:
        return min(a.x1, b.x1) - max(a.x0, b.x0) > 0
    return False


def are_neighbors(r1: Region, r2: Region) -> bool:
    """True iff the regions share a boundary segment of positive length."""
    if r1 is r2:
        return False
    return any(_touch(a, b) for a in r1.rects for b in r2.rects)


def project(data: Dataset2D, rect: Rect, axis: Axis) -> np.ndarray:
    """Coordinates of the points inside ``rect`` along the split axis.

    ``vertical`` cut lines split by x, so the x coordinates are returned;
    ``horizontal`` returns y.
    """
    mask = rect.contains(data.ix, data.iy, data.grid)
    if axis == "vertical":
        return data.grid.to_coord(data.ix[mask], 0)
    return data.grid.to_coord(data.iy[mask], 1)


def shared_edges(rects_by_label):
    """Yield ``(axis, pos, lo, hi, label_a, label_b)`` for every stretch where a
    rectangle's far edge (right for axis 0, top for axis 1) meets the near edge
    of a rectangle with a different label.  ``[lo, hi)`` runs along the edge.
    """
    for axis in (0, 1):
        starts: dict[int, list] = {}
        ends: dict[int, list] = {}
        for rect, lab in rects_by_label:
            lo, hi = rect.span(axis)
            olo, ohi = rect.span(1 - axis)
            starts.setdefault(lo, []).append((olo, ohi, lab))
            ends.setdefault(hi, []).append((olo, ohi, lab))
        for pos in sorted(ends):
            right = starts.get(pos)
            if not right:
                continue
            left = sorted(ends[pos])
            right = sorted(right)
            i = j = 0
            while i < len(left) and j < len(right):
                l0, l1, la = left[i]
                r0, r1, lb = right[j]
                lo, hi = max(l0, r0), min(l1, r1)
                if hi > lo and la != lb:
                    yield axis, pos, lo, hi, la, lb
                if l1 < r1:
                    i += 1
                else:
                    j += 1


def label_rows(partition: Partition, r0: int, r1: int) -> np.ndarray:
    """Region index of every lattice cell in rows ``[r0, r1)`` as an array of
    shape ``(r1 - r0, nx)``."""
    out = np.full((r1 - r0, partition.grid.nx), -1, dtype=np.int32)
    for j, reg in enumerate(partition.regions):
        for r in reg.rects:
            lo, hi = max(r.y0, r0), min(r.y1, r1)
            if hi > lo:
                out[lo - r0:hi - r0, r.x0:r.x1] = j
    return out
