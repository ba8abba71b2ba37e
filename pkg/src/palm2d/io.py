"""File formats: points as CSV, partitions and truths as JSON.

Partition files store the lattice (epsilon, origin, extent) and every
rectangle as integer lattice offsets ``[x0, y0, x1, y1]`` from the origin, so
a file read back reproduces the partition exactly.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .geometry import Dataset2D, GridSpec, Partition, Rect, Region, snap_to_grid


class FormatError(ValueError):
    """Unreadable or inconsistent input file."""


def _decimals(eps: float) -> int:
    d = max(0, math.ceil(-math.log10(eps) - 1e-9))
    scaled = eps * 10 ** d
    return d if abs(scaled - round(scaled)) <= 1e-9 * scaled else d + 2


def format_points(data: Dataset2D) -> str:
    d = _decimals(data.grid.epsilon)
    lines = ["x,y"]
    for x, y in data.points:
        lines.append(f"{x:.{d}f},{y:.{d}f}")
    return "\n".join(lines) + "\n"


def write_points(path, data: Dataset2D) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_points(data))


def read_points(path) -> np.ndarray:
    """Raw ``(n, 2)`` coordinates from a CSV file with header ``x,y``."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and [c.strip().lower() for c in row] == ["x", "y"]:
                continue
            if len(row) != 2:
                raise FormatError(f"line {lineno}: expected 2 columns, got {len(row)}")
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                raise FormatError(f"line {lineno}: cannot parse {','.join(row)!r}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise FormatError(f"line {lineno}: non-finite coordinate")
            rows.append((x, y))
    return np.array(rows, dtype=float).reshape(-1, 2)


def partition_to_dict(partition: Partition, densities, meta: dict | None = None) -> dict:
    g = partition.grid
    regions = []
    for reg, f in zip(partition.regions, densities):
        regions.append({
            "rects": [[r.x0, r.y0, r.x1, r.y1] for r in reg.rects],
            "density": float(f),
            "count": int(reg.count),
        })
    return {"epsilon": g.epsilon, "origin": list(g.origin), "extent": list(g.shape),
            "regions": regions, "meta": dict(meta or {})}


def _dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_partition(path, partition: Partition, densities, meta: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(_dumps(partition_to_dict(partition, densities, meta)))


def _grid_from(doc: dict) -> GridSpec:
    try:
        eps = float(doc["epsilon"])
        origin = [int(v) for v in doc["origin"]]
        extent = [int(v) for v in doc["extent"]]
        if len(origin) != 2 or len(extent) != 2:
            raise ValueError("origin and extent need two entries")
        return GridSpec(eps, tuple(origin), tuple(extent))
    except (KeyError, TypeError, ValueError) as err:
        raise FormatError(f"bad lattice description: {err}") from None


def partition_from_dict(doc: dict) -> tuple[Partition, np.ndarray, dict]:
    grid = _grid_from(doc)
    try:
        regions, dens = [], []
        for item in doc["regions"]:
            rects = [Rect(int(a), int(c), int(b), int(d)) for a, b, c, d in item["rects"]]
            regions.append(Region.of(rects, int(item.get("count", 0))))
            dens.append(float(item["density"]))
    except (KeyError, TypeError, ValueError) as err:
        raise FormatError(f"bad region entry: {err}") from None
    if not regions:
        raise FormatError("partition has no regions")
    part = Partition(tuple(regions), grid)
    try:
        part.validate()
    except AssertionError as err:
        raise FormatError(f"invalid partition: {err}") from None
    return part, np.array(dens), dict(doc.get("meta", {}))


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise FormatError(f"{path}: not valid JSON ({err.msg} at line {err.lineno})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return doc


def read_partition(path) -> tuple[Partition, np.ndarray, dict]:
    return partition_from_dict(_load_json(path))


def truth_to_dict(truth) -> dict:
    meta = {"kind": truth.kind, **{k: v for k, v in truth.params.items()}}
    if truth.partition is not None:
        return partition_to_dict(truth.partition, truth.densities, meta)
    g = truth.grid
    doc = {"epsilon": g.epsilon, "origin": list(g.origin), "extent": list(g.shape), "meta": meta}
    if truth.kind == "sine":
        meta["m"] = truth.m
    elif truth.kind == "gaussian":
        meta["correlation"] = truth.correlation
    return doc


def write_truth(path, truth) -> None:
    with open(path, "w") as fh:
        fh.write(_dumps(truth_to_dict(truth)))


def read_truth(path):
    from .synth import GroundTruth

    doc = _load_json(path)
    meta = dict(doc.get("meta", {}))
    kind = meta.pop("kind", "partition")
    if "regions" in doc:
        part, dens, _ = partition_from_dict(doc)
        return GroundTruth(kind if kind in ("partition", "quadrant") else "partition", part.grid, part, dens,
                           params=meta)
    grid = _grid_from(doc)
    try:
        if kind == "sine":
            m = int(meta.pop("m"))
            return GroundTruth("sine", grid, m=m, params=meta)
        if kind == "gaussian":
            rho = float(meta.pop("correlation"))
            return GroundTruth("gaussian", grid, correlation=rho, params=meta)
    except (KeyError, ValueError) as err:
        raise FormatError(f"{path}: incomplete truth description ({err})") from None
    raise FormatError(f"{path}: unknown truth kind {kind!r}")
