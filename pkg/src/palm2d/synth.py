"""Seeded synthetic data with known ground truth.

All randomness comes from :class:`palm2d.rng.SplitMix64`, so every generator
is a pure function of its arguments and the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .geometry import Dataset2D, GridSpec, Partition, Rect, Region, label_rows, shared_edges, snap_to_grid
from .rng import SplitMix64

UNIT_EPS = 0.001


@dataclass(frozen=True)
class GroundTruth:
    """True density carrier.

    ``kind`` is one of ``partition``, ``quadrant``, ``sine``, ``gaussian``.
    Partition-like truths hold ``partition`` and ``densities``; ``sine`` holds
    ``m``; ``gaussian`` holds ``correlation``.  ``params`` keeps the derived
    constants (normalizers, cut lines).
    """

    kind: str
    grid: GridSpec
    partition: Partition | None = None
    densities: np.ndarray | None = None
    m: int | None = None
    correlation: float | None = None
    params: dict = field(default_factory=dict)

    def density_rows(self, r0: int, r1: int) -> np.ndarray:
        """True density at the centres of the lattice cells in rows ``[r0, r1)``."""
        g = self.grid
        if self.partition is not None:
            return np.asarray(self.densities)[label_rows(self.partition, r0, r1)]
        x = g.to_coord(np.arange(g.nx) + 0.5, 0)
        y = g.to_coord(np.arange(r0, r1) + 0.5, 1)
        return self.density(x[None, :], y[:, None])

    def density(self, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        g = self.grid
        if self.kind == "sine":
            # cells take the side of their lower-left lattice point
            ix = np.floor(x / g.epsilon + 1e-9).astype(np.int64)
            iy = np.floor(y / g.epsilon + 1e-9).astype(np.int64)
            above = _above(ix, iy, g.epsilon, self.m)
            return np.where(above, self.params["c_above"], self.params["c_below"])
        if self.kind == "gaussian":
            rho = self.correlation
            q = (x * x - 2 * rho * x * y + y * y) / (1 - rho * rho)
            return np.exp(-0.5 * q) / (2 * math.pi * math.sqrt(1 - rho * rho) * self.params["mass"])
        ix = np.clip(np.floor(x / g.epsilon - g.origin[0]).astype(np.int64), 0, g.nx - 1)
        iy = np.clip(np.floor(y / g.epsilon - g.origin[1]).astype(np.int64), 0, g.ny - 1)
        out = np.empty(ix.shape)
        for j, reg in enumerate(self.partition.regions):
            for r in reg.rects:
                inside = (ix >= r.x0) & (ix < r.x1) & (iy >= r.y0) & (iy < r.y1)
                out[inside] = self.densities[j]
        return out

    def total_mass(self, rows: int = 512) -> float:
        """Midpoint-rule integral of the density over the sample space."""
        s = 0.0
        for r0 in range(0, self.grid.ny, rows):
            s += float(self.density_rows(r0, min(r0 + rows, self.grid.ny)).sum())
        return s * self.grid.epsilon ** 2


def sine_curve(x, m: int):
    return 0.25 * np.sin(2 * m * math.pi * np.asarray(x, float)) + 0.5


def _above(ix, iy, eps: float, m: int):
    """Whether the cell with lower-left lattice point (ix, iy) lies above the curve."""
    return iy * eps > sine_curve(ix * eps, m)


def _unit_grid(eps: float) -> GridSpec:
    return GridSpec.from_bounds(0, 0, 1, 1, eps)


def _distinct_cuts(rng: SplitMix64, lo: int, hi: int, count: int) -> list[int]:
    """``count`` distinct integers drawn uniformly from ``[lo, hi)``."""
    if count > hi - lo:
        raise ValueError(f"cannot place {count} distinct cuts in {hi - lo} positions")
    picked: set[int] = set()
    while len(picked) < count:
        for c in rng.integers(lo, hi, count - len(picked)).tolist():
            if len(picked) < count:
                picked.add(c)
    return sorted(picked)


def gen_true_partition(seed: int, k1: int = 5, k2_each: int = 5, p_merge: float = 0.4,
                       eps: float = UNIT_EPS) -> GroundTruth:
    """Random column/row partition of the unit square with random merges.

    ``k1`` columns are cut at distinct uniform lattice positions, each column
    into ``k2_each`` rows; then every pair of adjacent rectangles is merged
    with probability ``p_merge``.  Region densities are uniform(0, 1) draws
    normalized to integrate to one.
    """
    if k1 < 1 or k2_each < 1:
        raise ValueError("k1 and k2_each must be >= 1")
    if not 0 <= p_merge <= 1:
        raise ValueError("p_merge must lie in [0, 1]")
    grid = _unit_grid(eps)
    rng = SplitMix64(seed)
    cut_rng, merge_rng, dens_rng = rng.child(1), rng.child(2), rng.child(3)
    xs = [0] + _distinct_cuts(cut_rng, 1, grid.nx, k1 - 1) + [grid.nx]
    rects = []
    for i in range(k1):
        ys = [0] + _distinct_cuts(cut_rng, 1, grid.ny, k2_each - 1) + [grid.ny]
        rects += [Rect(xs[i], xs[i + 1], ys[j], ys[j + 1]) for j in range(k2_each)]

    parent = list(range(len(rects)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    pairs = sorted({(min(a, b), max(a, b))
                    for *_, a, b in shared_edges([(r, i) for i, r in enumerate(rects)])})
    draws = merge_rng.random(len(pairs))
    for (a, b), u in zip(pairs, draws):
        if u < p_merge:
            parent[find(a)] = find(b)
    groups: dict[int, list[Rect]] = {}
    for i, r in enumerate(rects):
        groups.setdefault(find(i), []).append(r)
    regions = sorted((Region.of(g) for g in groups.values()), key=lambda r: r.rects[0])
    part = Partition(tuple(regions), grid)
    f = dens_rng.random(len(regions))
    areas = np.array([r.area for r in regions], float) * eps * eps
    f = f / float(f @ areas)
    return GroundTruth("partition", grid, part, f, params={"k1": k1, "k2_each": k2_each, "p_merge": p_merge})


def _uniform_in_rects(rng: SplitMix64, rects: list[Rect], which: np.ndarray):
    """A uniformly chosen lattice cell of ``rects[which[i]]`` for every i."""
    x0 = np.array([r.x0 for r in rects])[which]
    y0 = np.array([r.y0 for r in rects])[which]
    w = np.array([r.x1 - r.x0 for r in rects])[which]
    h = np.array([r.y1 - r.y0 for r in rects])[which]
    u = rng.random(2 * which.size).reshape(-1, 2)
    return x0 + np.floor(u[:, 0] * w).astype(np.int64), y0 + np.floor(u[:, 1] * h).astype(np.int64)


def sample_histogram(truth: GroundTruth, n: int, seed: int) -> Dataset2D:
    """``n`` draws from a piecewise-constant truth.

    The region is chosen with probability f_j |S_j|, then a rectangle of the
    region in proportion to its area, then a lattice cell uniformly inside it.
    Points are reported at the cell's lower-left lattice point, which keeps
    each point inside its source region.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    part = truth.partition
    rects = [r for reg in part.regions for r in reg.rects]
    eps2 = truth.grid.epsilon ** 2
    owner = np.repeat(np.arange(part.k), [len(reg.rects) for reg in part.regions])
    mass = np.array([r.area for r in rects], float) * eps2 * np.asarray(truth.densities)[owner]
    cdf = np.cumsum(mass / mass.sum())
    cdf[-1] = 1.0
    rng = SplitMix64(seed)
    which = np.searchsorted(cdf, rng.random(n), side="right")
    ix, iy = _uniform_in_rects(rng, rects, which)
    return Dataset2D(truth.grid, ix, iy)


def gen_sine(m: int, n: int, seed: int, eps: float = UNIT_EPS) -> tuple[Dataset2D, GroundTruth]:
    """Two-level density split by the curve g(x) = sin(2 m pi x) / 4 + 1/2.

    ceil(2n/3) points are drawn uniformly above the curve and floor(n/3)
    below it, by rejection from the lattice cells of the unit square.  A
    cell is represented by its lower-left lattice point, which also decides
    its side of the curve.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    grid = _unit_grid(eps)
    n_above = -(-2 * n // 3)
    n_below = n - n_above
    rng = SplitMix64(seed)
    want = {True: n_above, False: n_below}
    got = {True: [], False: []}
    have = {True: 0, False: 0}
    while have[True] < want[True] or have[False] < want[False]:
        size = max(64, 2 * (want[True] - have[True] + want[False] - have[False]))
        ix = rng.integers(0, grid.nx, size)
        iy = rng.integers(0, grid.ny, size)
        up = _above(ix, iy, eps, m)
        for side in (True, False):
            sel = np.flatnonzero(up == side)[: want[side] - have[side]]
            got[side].append(np.column_stack([ix[sel], iy[sel]]))
            have[side] += sel.size
    pts = np.concatenate(got[True] + got[False]) if n else np.zeros((0, 2), np.int64)
    data = Dataset2D(grid, pts[:, 0], pts[:, 1])

    # normalize over the cells so the midpoint integral is exactly one
    cols = np.arange(grid.nx)
    above_cells = sum(int(_above(cols[None, :], np.arange(r0, min(r0 + 256, grid.ny))[:, None], eps, m).sum())
                      for r0 in range(0, grid.ny, 256))
    below_cells = grid.cells - above_cells
    params = {"c_above": (2 / 3) / (above_cells * eps * eps),
              "c_below": (1 / 3) / (below_cells * eps * eps), "n_above": n_above}
    return data, GroundTruth("sine", grid, m=m, params=params)


def gaussian_mass(rho: float, half: float = 5.0) -> float:
    """Probability that the standard bivariate normal with correlation ``rho``
    falls in the square [-half, half]^2."""
    s = math.sqrt(1 - rho * rho)

    def inner(x):
        return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * (
            ndtr((half - rho * x) / s) - ndtr((-half - rho * x) / s))

    val, _ = integrate.quad(inner, -half, half, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def gen_gaussian(rho: float, n: int, seed: int, eps: float = UNIT_EPS) -> tuple[Dataset2D, GroundTruth]:
    """Standard bivariate normal with correlation ``rho`` truncated to [-5, 5]^2."""
    if not -1 < rho < 1:
        raise ValueError("correlation must lie in (-1, 1)")
    if n < 0:
        raise ValueError("n must be >= 0")
    grid = GridSpec.from_bounds(-5, -5, 5, 5, eps)
    rng = SplitMix64(seed)
    s = math.sqrt(1 - rho * rho)
    chunks, have = [], 0
    while have < n:
        z = rng.normal(2 * max(64, n - have)).reshape(-1, 2)
        xy = np.column_stack([z[:, 0], rho * z[:, 0] + s * z[:, 1]])
        xy = xy[(np.abs(xy) <= 5).all(axis=1)][: n - have]
        chunks.append(xy)
        have += len(xy)
    pts = np.concatenate(chunks) if chunks else np.zeros((0, 2))
    data = snap_to_grid(pts, grid)
    return data, GroundTruth("gaussian", grid, correlation=rho, params={"mass": gaussian_mass(rho)})


def gen_quadrant(seed: int, n: int, eps: float = UNIT_EPS) -> tuple[Dataset2D, GroundTruth]:
    """Four quadrants cut by x = V_x and y = H_y with equal point counts.

    V_x and H_y are uniform on (0, 1), snapped to the lattice and redrawn if
    they land on the border.  When 4 does not divide n the leftover points go
    to the quadrants in order (lower-left, lower-right, upper-left,
    upper-right).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    grid = _unit_grid(eps)
    rng = SplitMix64(seed)
    line_rng, pt_rng = rng.child(1), rng.child(2)

    def draw(limit):
        while True:
            c = int(np.floor(line_rng.random(1)[0] / eps + 0.5))
            if 0 < c < limit:
                return c

    vx, hy = draw(grid.nx), draw(grid.ny)
    quads = [Rect(0, vx, 0, hy), Rect(vx, grid.nx, 0, hy), Rect(0, vx, hy, grid.ny), Rect(vx, grid.nx, hy, grid.ny)]
    counts = [n // 4 + (1 if q < n % 4 else 0) for q in range(4)]
    which = np.repeat(np.arange(4), counts)
    ix, iy = _uniform_in_rects(pt_rng, quads, which)
    data = Dataset2D(grid, ix, iy)
    regions = tuple(sorted((Region.of([q], c) for q, c in zip(quads, counts)), key=lambda r: r.rects[0]))
    part = Partition(regions, grid)
    dens = np.array([0.25 / (r.area * eps * eps) for r in regions])
    return data, GroundTruth("quadrant", grid, part, dens,
                             params={"vx": vx * eps, "hy": hy * eps, "vx_lattice": vx, "hy_lattice": hy})
