import math

import numpy as np
import pytest

from oracles import exhaustive_mdl_1d, loglik_1d, pruned_by_definition, random_1d_instance
from palm2d.hist1d import (
    Extent1D, candidate_cuts, dp_best_cuts, log2_binom, retained_offsets,
    select_lattice, select_mdl_histogram,
)


def test_extent_counts():
    assert Extent1D(0, 10, 1).E == 9
    assert Extent1D(0, 1, 0.001).E == 999
    assert Extent1D(0, 10.5, 1).lattice == (10, 0.5)
    assert Extent1D(0, 10.5, 1).E == 10


def test_candidates_gap():
    got = candidate_cuts([0, 10], Extent1D(0, 10, 1))
    assert got.tolist() == [1, 9]


def test_candidates_dense():
    z = np.arange(0, 11)
    assert candidate_cuts(z, Extent1D(0, 10, 1)).tolist() == list(range(1, 10))


def test_candidates_empty():
    assert candidate_cuts([], Extent1D(0, 10, 1)).size == 0


@pytest.mark.parametrize("seed", range(40))
def test_pruning_matches_definition(seed):
    z, whole, _ = random_1d_instance(seed)
    if not z:
        return
    assert retained_offsets(np.array(z), whole).tolist() == pruned_by_definition(z, whole)


def test_single_bin_likelihood():
    z = [0.5, 2.0, 7.0]
    res = dp_best_cuts(z, Extent1D(0, 10, 0.5), 1)
    assert res.per_k_loglik[1] == pytest.approx(3 * math.log2(0.5 / 10))
    assert res.cuts(1).size == 0


def test_two_point_masses():
    z = [0] * 10 + [10] * 10
    res = dp_best_cuts(z, Extent1D(0, 10, 1), 2)
    assert res.cuts(2).tolist() == [1]          # tie between 1 and 9 goes left
    assert res.per_k_loglik[2] > res.per_k_loglik[1]
    off = [int(v) for v in z]
    best = max(loglik_1d(off, [c], 10) for c in range(1, 10))
    assert res.per_k_loglik[2] == pytest.approx(best, abs=1e-9)


def test_uniform_sweep_k2_matches_exhaustive():
    z = list(range(0, 21)) + list(range(0, 21, 3))
    res = dp_best_cuts(z, Extent1D(0, 20, 1), 2, prune=False)
    best = max(loglik_1d(z, [c], 20) for c in range(1, 20))
    assert res.per_k_loglik[2] == pytest.approx(best, abs=1e-9)


def test_empty_sample_picks_one_bin():
    res = select_mdl_histogram([], Extent1D(0, 1, 0.01), 5)
    assert res.chosen_k == 1


def test_separated_clusters():
    # coarsened so that the exhaustive search stays cheap: 20 cells of 0.05
    rng = np.random.default_rng(3)
    left = rng.integers(0, 5, 500)
    right = rng.integers(16, 21, 500)
    off = np.concatenate([left, right])
    z = off * 0.05
    res = select_mdl_histogram(z, Extent1D(0, 1, 0.05), 3)
    oracle = exhaustive_mdl_1d(off.tolist(), 20, 3)
    assert res.best_total == pytest.approx(oracle, abs=1e-9)
    assert res.chosen_k >= 2
    cuts = res.cuts()
    assert np.all((cuts > 0.2) & (cuts <= 0.8))


def test_uniform_cluster_small_n():
    rng = np.random.default_rng(5)
    off = rng.integers(0, 21, 20)
    res = select_mdl_histogram(off * 0.05, Extent1D(0, 1, 0.05), 4)
    assert res.best_total == pytest.approx(exhaustive_mdl_1d(off.tolist(), 20, 4), abs=1e-9)
    assert res.chosen_k == 1


@pytest.mark.parametrize("seed", range(100))
def test_dp_matches_exhaustive(seed):
    z, whole, k_max = random_1d_instance(seed)
    res = select_lattice(np.array(z, dtype=np.int64), whole, k_max)
    retained = retained_offsets(np.array(z), whole).tolist() if z else []
    assert res.best_total == pytest.approx(exhaustive_mdl_1d(z, whole, k_max, retained), abs=1e-9)
    full = select_lattice(np.array(z, dtype=np.int64), whole, k_max, prune=False)
    assert full.best_total == pytest.approx(exhaustive_mdl_1d(z, whole, k_max), abs=1e-9)
    assert res.best_total == pytest.approx(full.best_total, abs=1e-9)
    ll = res.per_k_loglik[1:]
    finite = ll[np.isfinite(ll)]
    assert np.all(np.diff(finite) >= -1e-9)
    assert res.evaluations <= k_max * max(1, res.E) ** 2 + whole


def test_pruning_needs_monotone_model_cost():
    # With E = 3 and up to 4 bins, log2 C(E, K-1) falls from K=3 to K=4 and
    # the all-cuts model (which uses the pruned position 2) becomes optimal.
    z = np.array([0, 0])
    full = select_lattice(z, 4, 4, prune=False)
    pruned = select_lattice(z, 4, 4)
    assert full.chosen_k == 4
    assert full.best_total < pruned.best_total
    assert log2_binom(3, 3) < log2_binom(3, 2)


def test_model_bits_use_full_lattice():
    ext = Extent1D(0, 1, 0.01)
    few = select_mdl_histogram([0.1, 0.9], ext, 3)
    many = select_mdl_histogram(np.linspace(0, 1, 101), ext, 3)
    for res in (few, many):
        assert res.E == 99
    # same extent, same K: identical model term regardless of the data
    for k in (2, 3):
        m1 = few.total_bits[k] + few.per_k_loglik[k]
        m2 = many.total_bits[k] + many.per_k_loglik[k]
        from palm2d.nml import log_comp
        assert m1 - log_comp(2, 3)[k] == pytest.approx(m2 - log_comp(101, 3)[k])


def test_partial_last_cell():
    ext = Extent1D(0, 10.5, 1)
    res = select_mdl_histogram([0, 1, 2, 10.4, 10.5], ext, 3)
    assert res.E == 10
    assert np.isfinite(res.best_total)
