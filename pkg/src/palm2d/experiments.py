"""Repeated simulation runs on the synthetic families.

Each function returns plain per-seed records so callers can aggregate them
as they like.
"""
from __future__ import annotations

from dataclasses import asdict

import numpy as np
from scipy.spatial import cKDTree

from .evaluate import DEFAULT_PIXEL, boundary_pixels, evaluate, fixed_grid, mise_single, truth_pixels
from .palm import PalmConfig, palm_fit
from .rng import SplitMix64
from .synth import gen_gaussian, gen_quadrant, gen_sine, gen_true_partition, sample_histogram, sine_curve


def sample_seed(seed: int) -> int:
    """Seed of the data stream belonging to truth ``seed``."""
    return SplitMix64(seed).child(7).seed


def capped_splits(fit) -> int:
    """Number of accepted 1-D splits that used the full bin budget."""
    return sum(e.get("capped", 0) for e in fit.trace)


def truth_recovery(seeds, n: int, k_max: int = 50, pixel: float = DEFAULT_PIXEL) -> list[dict]:
    out = []
    for s in seeds:
        truth = gen_true_partition(s)
        data = sample_histogram(truth, n, sample_seed(s))
        fit = palm_fit(data, PalmConfig(k_max=k_max))
        rep = evaluate(truth, fit.partition, fit.densities, pixel, fit.runtime)
        out.append({"seed": s, "n": n, **asdict(rep), "pre_merge_regions": fit.pre_merge_regions,
                    "capped": capped_splits(fit)})
    return out


def gaussian_vs_grid(seeds, rho: float, n: int, k_max: int = 50) -> list[dict]:
    out = []
    for s in seeds:
        data, truth = gen_gaussian(rho, n, s)
        fit = palm_fit(data, PalmConfig(k_max=k_max))
        gp, gd = fixed_grid(data, fit.partition.k)
        out.append({"seed": s, "rho": rho, "regions": fit.partition.k, "grid_regions": gp.k,
                    "mise_palm": mise_single(truth, fit.partition, fit.densities),
                    "mise_grid": mise_single(truth, gp, gd), "runtime": fit.runtime,
                    "capped": capped_splits(fit)})
    return out


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else float("inf")
    return float(max(cKDTree(b).query(a)[0].max(), cKDTree(a).query(b)[0].max()))


def quadrant_recovery(seeds, n: int, k_max: int = 50, pixel: float = DEFAULT_PIXEL) -> list[dict]:
    out = []
    for s in seeds:
        data, truth = gen_quadrant(s, n)
        fit = palm_fit(data, PalmConfig(k_max=k_max))
        lp, tp = boundary_pixels(fit.partition, pixel), truth_pixels(truth, pixel)
        rep = evaluate(truth, fit.partition, fit.densities, pixel, fit.runtime)
        out.append({"seed": s, "n": n, "vx": truth.params["vx"], "hy": truth.params["hy"],
                    "hausdorff": hausdorff(lp.points, tp.points), **asdict(rep),
                    "capped": capped_splits(fit)})
    return out


def sine_fit(seeds, m: int, n: int, k_max: int = 50, pixel: float = DEFAULT_PIXEL) -> list[dict]:
    """Distance of every learned boundary pixel to the true curve."""
    x = np.linspace(0.0, 1.0, 200_001)
    curve = cKDTree(np.column_stack([x, sine_curve(x, m)]))
    out = []
    for s in seeds:
        data, truth = gen_sine(m, n, s)
        fit = palm_fit(data, PalmConfig(k_max=k_max))
        lp = boundary_pixels(fit.partition, pixel)
        dist = curve.query(lp.points)[0] if len(lp) else np.zeros(0)
        out.append({"seed": s, "regions": fit.partition.k, "pixels": len(lp),
                    "distances": dist, "runtime": fit.runtime, "capped": capped_splits(fit)})
    return out
