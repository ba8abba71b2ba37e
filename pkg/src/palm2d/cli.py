"""Command-line interface: ``palm2d fit | synth | eval | plot``.

Exit codes: 0 success, 2 usage or input error, 3 internal invariant
violation.  Errors are printed to stderr as one JSON line.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io
from .evaluate import DEFAULT_PIXEL, evaluate
from .geometry import GridSpec, OutOfBoundsError, bounding_grid, snap_to_grid
from .palm import PalmConfig, palm_fit
from .rng import SplitMix64
from .synth import gen_gaussian, gen_quadrant, gen_sine, gen_true_partition, sample_histogram

log = logging.getLogger("palm2d")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _threads() -> int:
    raw = os.environ.get("PALM_THREADS", "0")
    try:
        t = int(raw)
    except ValueError:
        raise UsageError(f"PALM_THREADS must be an integer, got {raw!r}") from None
    if t < 0:
        raise UsageError("PALM_THREADS must be >= 0")
    return t if t > 0 else (os.cpu_count() or 1)


def _space(spec: str, raw: np.ndarray, eps: float) -> GridSpec:
    if spec == "auto":
        return bounding_grid(raw, eps)
    try:
        x0, y0, x1, y1 = (float(v) for v in spec.split(","))
    except ValueError:
        raise UsageError(f"--space must be 'auto' or x0,y0,x1,y1, got {spec!r}") from None
    try:
        return GridSpec.from_bounds(x0, y0, x1, y1, eps)
    except ValueError as err:
        raise UsageError(f"bad --space: {err}") from None


def cmd_fit(args) -> int:
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    raw = io.read_points(args.input)
    grid = _space(args.space, raw, args.epsilon)
    data = snap_to_grid(raw, grid)
    if data.n == 0:
        log.warning("empty input: fitting the single-region histogram")
    direction = {"v": "vertical", "h": "horizontal"}.get(args.direction, args.direction)
    try:
        config = PalmConfig(k_max=args.kmax, direction=direction, threads=_threads(), check=args.check)
    except ValueError as err:
        raise UsageError(str(err)) from None
    res = palm_fit(data, config)
    meta = {"n": data.n, "total_bits": res.total_bits, "data_bits": res.code_length.data_bits,
            "k_max": args.kmax, "direction": direction, "seed": None,
            "pre_merge_regions": res.pre_merge_regions}
    io.write_partition(args.out, res.partition, res.densities, meta)
    print(json.dumps({"regions": res.partition.k, "total_bits": res.total_bits, "n": data.n,
                      "runtime": round(res.runtime, 3)}))
    return 0


_FAMILY_FLAGS = {
    "partition": {"k1", "k2", "pmerge"},
    "sine": {"m"},
    "gaussian": {"rho"},
    "quadrant": set(),
}


def cmd_synth(args) -> int:
    given = {k for k in ("k1", "k2", "pmerge", "m", "rho") if getattr(args, k) is not None}
    extra = given - _FAMILY_FLAGS[args.family]
    if extra:
        raise UsageError(f"--{', --'.join(sorted(extra))} not valid for family {args.family}")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    try:
        if args.family == "partition":
            truth = gen_true_partition(args.seed, args.k1 or 5, args.k2 or 5,
                                       0.4 if args.pmerge is None else args.pmerge, args.epsilon)
            data = sample_histogram(truth, args.n, SplitMix64(args.seed).child(7).seed)
        elif args.family == "sine":
            data, truth = gen_sine(2 if args.m is None else args.m, args.n, args.seed, args.epsilon)
        elif args.family == "gaussian":
            data, truth = gen_gaussian(0.0 if args.rho is None else args.rho, args.n, args.seed, args.epsilon)
        else:
            data, truth = gen_quadrant(args.seed, args.n, args.epsilon)
    except ValueError as err:
        raise UsageError(str(err)) from None
    io.write_points(args.out, data)
    if args.truth:
        io.write_truth(args.truth, truth)
    return 0


def cmd_eval(args) -> int:
    part, dens, meta = io.read_partition(args.learned)
    truth = io.read_truth(args.truth)
    report = evaluate(truth, part, dens, args.pixel)
    text = json.dumps(report.to_dict(), sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_plot(args) -> int:
    from .svg import render_svg

    part, dens, _ = io.read_partition(args.partition)
    pts = io.read_points(args.points) if args.points else None
    svg = render_svg(part, dens, pts, shade=args.shade == "density")
    with open(args.out, "w") as fh:
        fh.write(svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="palm2d", description="Two-dimensional MDL histograms.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", help="fit a histogram to a CSV of points")
    f.add_argument("--input", required=True)
    f.add_argument("--epsilon", type=float, default=0.001)
    f.add_argument("--kmax", type=int, default=300)
    f.add_argument("--direction", choices=["v", "h", "vertical", "horizontal"], default="v")
    f.add_argument("--space", default="auto")
    f.add_argument("--out", required=True)
    f.add_argument("--check", action="store_true", help="validate partitions during the fit")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("synth", help="generate synthetic data")
    s.add_argument("--family", required=True, choices=sorted(_FAMILY_FLAGS))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--epsilon", type=float, default=0.001)
    s.add_argument("--k1", type=int)
    s.add_argument("--k2", type=int)
    s.add_argument("--pmerge", type=float)
    s.add_argument("--m", type=int)
    s.add_argument("--rho", type=float)
    s.add_argument("--out", required=True)
    s.add_argument("--truth")
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="compare a learned partition with the truth")
    e.add_argument("--learned", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--pixel", type=float, default=DEFAULT_PIXEL)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    pl = sub.add_parser("plot", help="render a partition as SVG")
    pl.add_argument("--partition", required=True)
    pl.add_argument("--points")
    pl.add_argument("--out", required=True)
    pl.add_argument("--shade", choices=["none", "density"], default="none")
    pl.set_defaults(func=cmd_plot)
    return p


def _fail(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"error": " ".join(message.split()), "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        return _fail(2, str(err))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, io.FormatError, OutOfBoundsError) as err:
        return _fail(2, str(err))
    except (FileNotFoundError, IsADirectoryError, PermissionError) as err:
        return _fail(2, f"{err.strerror}: {err.filename}")
    except AssertionError as err:
        return _fail(3, f"internal invariant violated: {err}")
    except Exception as err:  # noqa: BLE001
        return _fail(3, f"{type(err).__name__}: {err}")


if __name__ == "__main__":
    sys.exit(main())
