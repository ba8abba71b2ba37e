import hashlib
import math

import numpy as np
import pytest
from scipy import stats

from palm2d.geometry import GridSpec, Partition, Rect, Region, count_points
from palm2d.rng import SplitMix64
from palm2d.synth import (
    GroundTruth, gen_gaussian, gen_quadrant, gen_sine, gen_true_partition, sample_histogram, sine_curve,
)


def test_splitmix_reference_stream():
    # published reference outputs for seed 1234567
    out = SplitMix64(1234567).uint64(3).tolist()
    assert out == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_rng_uniform_range_and_children():
    r = SplitMix64(5)
    u = r.random(10_000)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01
    a, b = SplitMix64(5).child(1), SplitMix64(5).child(2)
    assert not np.array_equal(a.uint64(4), b.uint64(4))
    i = SplitMix64(9).integers(3, 7, 1000)
    assert set(i.tolist()) == {3, 4, 5, 6}


def test_rng_positions_are_independent_of_chunking():
    a = SplitMix64(11)
    whole = a.uint64(10)
    b = SplitMix64(11)
    parts = np.concatenate([b.uint64(3), b.uint64(7)])
    assert np.array_equal(whole, parts)


def test_true_partition_no_merges():
    t = gen_true_partition(3, 5, 5, 0.0)
    assert t.partition.k == 25
    t.partition.validate()


def test_true_partition_all_merged():
    t = gen_true_partition(3, 5, 5, 1.0)
    assert t.partition.k == 1
    assert t.densities == pytest.approx([1.0])


def test_true_partition_deterministic_and_normalized():
    a, b = gen_true_partition(42), gen_true_partition(42)
    assert a.partition == b.partition
    assert np.array_equal(a.densities, b.densities)
    assert abs(a.total_mass() - 1) <= 1e-6
    assert gen_true_partition(43).partition != a.partition


def test_true_partition_infeasible():
    with pytest.raises(ValueError):
        gen_true_partition(0, 5, 5, 0.4, eps=0.25)
    with pytest.raises(ValueError):
        gen_true_partition(0, 0, 5, 0.4)
    with pytest.raises(ValueError):
        gen_true_partition(0, 2, 2, 1.5)


def test_sample_uniform_region_chi_square():
    g = GridSpec(0.1, (0, 0), (10, 10))
    t = GroundTruth("partition", g, Partition.whole(g), np.array([1.0]))
    d = sample_histogram(t, 20_000, 1)
    counts = np.bincount(d.ix * 10 + d.iy, minlength=100)
    assert stats.chisquare(counts).pvalue > 0.001


def test_sample_ratio_two_to_one():
    g = GridSpec(0.5, (0, 0), (2, 2))
    part = Partition((Region.of([Rect(0, 1, 0, 2)]), Region.of([Rect(1, 2, 0, 2)])), g)
    t = GroundTruth("partition", g, part, np.array([4 / 3, 2 / 3]))
    d = sample_histogram(t, 30_000, 2)
    left = count_points(part.regions[0], d)
    assert stats.binomtest(left, d.n, 2 / 3).pvalue > 0.001


def test_sample_empty_and_inside_regions():
    t = gen_true_partition(7)
    assert sample_histogram(t, 0, 1).n == 0
    d = sample_histogram(t, 5000, 1)
    dens = np.asarray(t.densities)
    # every point sits in a region of positive density
    owner = np.full(d.n, -1)
    for j, reg in enumerate(t.partition.regions):
        owner[reg.contains(d.ix, d.iy, d.grid)] = j
    assert (owner >= 0).all() and (dens[owner] > 0).all()


def test_sine_split_and_sides():
    d, t = gen_sine(2, 99_999, 5)
    assert d.n == 99_999
    x, y = d.points.T
    above = y > sine_curve(x, 2)
    assert above.sum() == 66_666
    assert above[:66_666].all() and not above[66_666:].any()
    assert abs(t.total_mass() - 1) <= 1e-6


def test_sine_odd_split_and_hash():
    d, _ = gen_sine(1, 10, 0)
    assert d.n == 10 and (d.points[:, 1] > sine_curve(d.points[:, 0], 1)).sum() == 7
    h1 = hashlib.sha256(gen_sine(2, 10**5, 3)[0].ix.tobytes()).hexdigest()
    h2 = hashlib.sha256(gen_sine(2, 10**5, 3)[0].ix.tobytes()).hexdigest()
    assert h1 == h2


@pytest.mark.parametrize("rho", [0.0, 0.5])
def test_gaussian_correlation(rho):
    d, t = gen_gaussian(rho, 50_000, 11)
    pts = d.points
    assert (np.abs(pts) <= 5).all()
    assert np.corrcoef(pts.T)[0, 1] == pytest.approx(rho, abs=0.03)
    assert t.params["mass"] == pytest.approx(1, abs=1e-5)


def test_gaussian_density_integrates_to_one():
    _, t = gen_gaussian(0.5, 0, 0, eps=0.01)
    assert abs(t.total_mass() - 1) <= 1e-6
    assert t.density(0.0, 0.0) == pytest.approx(1 / (2 * math.pi * math.sqrt(0.75) * t.params["mass"]))


def test_quadrant_counts_and_truth():
    d, t = gen_quadrant(4, 10_002)
    counts = [count_points(r, d) for r in t.partition.regions]
    assert sorted(counts) == [2500, 2500, 2501, 2501]
    assert counts == [r.count for r in t.partition.regions]
    assert 0 < t.params["vx"] < 1 and 0 < t.params["hy"] < 1
    assert abs(t.total_mass() - 1) <= 1e-6
    d2, t2 = gen_quadrant(4, 10_002)
    assert np.array_equal(d.ix, d2.ix) and t2.params == t.params
