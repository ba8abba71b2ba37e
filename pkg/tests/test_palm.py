import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from palm2d.geometry import Dataset2D, GridSpec, Partition, Rect, Region, are_neighbors, count_points
from palm2d.nml import data_code_length_2d
from palm2d.palm import PalmConfig, merge_step, neighbor_pairs, palm_fit, partition_step
from palm2d.synth import gen_quadrant, gen_true_partition, sample_histogram

UNIT = GridSpec.from_bounds(0, 0, 1, 1, 0.001)


def test_config_validation():
    with pytest.raises(ValueError):
        PalmConfig(k_max=1)
    with pytest.raises(ValueError):
        PalmConfig(direction="diagonal")


def test_empty_data_single_region():
    res = palm_fit(Dataset2D.empty(UNIT), PalmConfig(k_max=10))
    assert res.partition.k == 1
    assert res.densities == pytest.approx([1.0])
    assert res.total_bits == 0.0


def test_uniform_data_stays_whole():
    rng = np.random.default_rng(3)
    d = Dataset2D(UNIT, rng.integers(0, 1000, 3000), rng.integers(0, 1000, 3000))
    res = palm_fit(d, PalmConfig(k_max=20, check=True))
    assert res.partition.k == 1
    assert res.densities == pytest.approx([1.0])


def test_quadrant_recovered_exactly():
    d, t = gen_quadrant(3, 10_000)
    res = palm_fit(d, PalmConfig(k_max=30, check=True))
    assert res.partition.k == 4
    assert sorted(r.rects for r in res.partition.regions) == sorted(r.rects for r in t.partition.regions)


def test_horizontal_start_matches_on_quadrant():
    d, _ = gen_quadrant(3, 10_000)
    v = palm_fit(d, PalmConfig(k_max=30))
    h = palm_fit(d, PalmConfig(k_max=30, direction="horizontal"))
    assert sorted(r.rects for r in v.partition.regions) == sorted(r.rects for r in h.partition.regions)


def test_partition_trace_halts_after_two_quiet_passes():
    t = gen_true_partition(1)
    d = sample_histogram(t, 5000, 9)
    trace = []
    part, bits = partition_step(d, PalmConfig(k_max=20), trace)
    assert [e["splits"] for e in trace[-2:]] == [0, 0]
    assert all(e["splits"] > 0 for e in trace[:-2])
    dirs = [e["direction"] for e in trace]
    assert all(a != b for a, b in zip(dirs, dirs[1:]))
    assert all(e["evaluations"] <= e["evaluation_bound"] for e in trace)
    part.validate(d)
    assert bits > 0


def test_threads_do_not_change_result():
    t = gen_true_partition(2)
    d = sample_histogram(t, 20_000, 4)
    a = palm_fit(d, PalmConfig(k_max=20, threads=1))
    b = palm_fit(d, PalmConfig(k_max=20, threads=3))
    assert a.partition == b.partition
    assert np.array_equal(a.densities, b.densities)


def test_merge_never_increases_code_length():
    t = gen_true_partition(6)
    d = sample_histogram(t, 20_000, 1)
    res = palm_fit(d, PalmConfig(k_max=20))
    merges = [e["bits"] for e in res.trace if e["phase"] == "merge"]
    start = [e["bits"] for e in res.trace if e["phase"] == "partition"][-1]
    seq = [start] + merges
    assert all(b <= a + 1e-9 for a, b in zip(seq, seq[1:]))
    assert res.code_length.data_bits == pytest.approx(seq[-1], abs=1e-6)
    res.partition.validate(d)


def _naive_merge(partition, data):
    """Greedy merging recomputing every candidate pair from scratch."""
    regions = list(partition.regions)
    while len(regions) > 1:
        cur = data_code_length_2d(Partition(tuple(regions), partition.grid), data)
        best = None
        for i in range(len(regions)):
            for j in range(i + 1, len(regions)):
                if not are_neighbors(regions[i], regions[j]):
                    continue
                rest = [r for k, r in enumerate(regions) if k not in (i, j)]
                cand = rest + [regions[i].merged(regions[j])]
                bits = data_code_length_2d(Partition(tuple(cand), partition.grid), data)
                if best is None or bits < best[0] - 1e-12:
                    best = (bits, cand)
        if best is None or best[0] > cur + 1e-12:
            break
        regions = best[1]
    return sorted(r.rects for r in regions)


@pytest.mark.parametrize("seed", range(6))
def test_merge_matches_naive_greedy(seed):
    t = gen_true_partition(seed, 3, 3, 0.0, eps=0.01)
    d = sample_histogram(t, 300, seed + 100)
    regs = tuple(Region.of(r.rects, count_points(r, d)) for r in t.partition.regions)
    part = Partition(regs, t.partition.grid)
    got = sorted(r.rects for r in merge_step(part, d).regions)
    assert got == _naive_merge(part, d)


def _random_rects(rng, nx, ny, depth):
    rects = [Rect(0, nx, 0, ny)]
    for _ in range(depth):
        i = int(rng.integers(len(rects)))
        r = rects[i]
        if rng.random() < 0.5 and r.x1 - r.x0 > 1:
            c = int(rng.integers(r.x0 + 1, r.x1))
            rects[i:i + 1] = [Rect(r.x0, c, r.y0, r.y1), Rect(c, r.x1, r.y0, r.y1)]
        elif r.y1 - r.y0 > 1:
            c = int(rng.integers(r.y0 + 1, r.y1))
            rects[i:i + 1] = [Rect(r.x0, r.x1, r.y0, c), Rect(r.x0, r.x1, c, r.y1)]
    return rects


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.integers(0, 15))
def test_neighbor_pairs_match_brute_force(seed, depth):
    rng = np.random.default_rng(seed)
    rects = _random_rects(rng, 10, 10, depth)
    labels = rng.integers(0, max(1, len(rects) // 2), len(rects)).tolist()
    regions = {k: Region.of([r for r, l in zip(rects, labels) if l == k]) for k in set(labels)}
    want = {(a, b) for a in regions for b in regions if a < b and are_neighbors(regions[a], regions[b])}
    assert neighbor_pairs(list(zip(rects, labels))) == want
