from itertools import combinations

import numpy as np
import pytest

from kkmlab import (
    KernelSpec,
    approximate_erm,
    brute_force_erm,
    cluster_cost,
    gram_matrix,
    kernel_kmeanspp,
    local_search_improve,
)
from kkmlab.datasets import blob_labels, two_blob_points
from kkmlab.errors import KTooLarge
from kkmlab.kernels import dists_to_points
from kkmlab.seeding import _labels_cost


def discrete_subset_optimum(K, k):
    """Brute force over all k-subsets of points as centers, scored by the
    mean squared distance to the nearest chosen point."""
    best = np.inf
    for subset in combinations(range(K.n), k):
        d = dists_to_points(K, list(subset)).min(axis=1)
        best = min(best, float(d.mean()))
    return best


def induced_subset_optimum(K, k):
    """Brute force over k-subsets, scored by the induced assignment's
    mean-centroid cost (the objective the local search accepts swaps on)."""
    best_cost = np.inf
    best_subset = None
    for subset in combinations(range(K.n), k):
        labels = np.argmin(dists_to_points(K, list(subset)), axis=1)
        cost = _labels_cost(K, labels, k)
        if cost < best_cost:
            best_cost = cost
            best_subset = subset
    return best_subset, best_cost


def seeding_from_centers(K, centers):
    from kkmlab.seeding import _result_for_centers

    return _result_for_centers(K, np.asarray(centers, dtype=np.int64), swaps=0)


class TestKmeansPP:
    def test_k_one_uniform(self):
        rng = np.random.default_rng(0)
        K = gram_matrix(KernelSpec("gaussian"), rng.normal(size=(10, 2)))
        res = kernel_kmeanspp(K, 1, rng)
        assert res.center_indices.shape == (1,)
        assert np.all(np.asarray(res.induced.labels) == 0)

    def test_two_locations_forces_second_center(self):
        # many exact copies at two spots: after the first draw the other
        # location is the only point with positive weight
        X = np.array([[0.0, 0.0]] * 6 + [[3.0, 0.0]] * 6)
        K = gram_matrix(KernelSpec("gaussian"), X)
        for seed in range(30):
            res = kernel_kmeanspp(K, 2, np.random.default_rng(seed))
            spots = {0 if i < 6 else 1 for i in res.center_indices}
            assert spots == {0, 1}

    def test_reproducible_with_fixed_seed(self):
        X = np.random.default_rng(99).normal(size=(20, 3))
        K = gram_matrix(KernelSpec("gaussian"), X)
        runs = [kernel_kmeanspp(K, 4, np.random.default_rng(42)) for _ in range(3)]
        for r in runs[1:]:
            assert np.array_equal(r.center_indices, runs[0].center_indices)

    def test_distinct_indices_and_cost_invariant(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(15, 2))
        K = gram_matrix(KernelSpec("gaussian"), X)
        res = kernel_kmeanspp(K, 3, rng)
        assert len(set(res.center_indices.tolist())) == 3
        assert res.cost == pytest.approx(cluster_cost(K, res.induced), abs=1e-14)

    def test_zero_weight_points_never_sampled(self):
        # every point at distance 0 from a center has zero selection weight:
        # duplicated points of a chosen center never become centers via D^2
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        K = gram_matrix(KernelSpec("linear"), X)
        for seed in range(40):
            res = kernel_kmeanspp(K, 3, np.random.default_rng(seed))
            assert not {0, 1} <= set(res.center_indices.tolist())

    def test_k_too_large(self):
        K = gram_matrix(KernelSpec("linear"), np.eye(3))
        with pytest.raises(KTooLarge):
            kernel_kmeanspp(K, 4, np.random.default_rng(0))


class TestLocalSearch:
    def test_zero_rounds_returns_input(self):
        rng = np.random.default_rng(1)
        K = gram_matrix(KernelSpec("gaussian"), rng.normal(size=(12, 2)))
        seed = kernel_kmeanspp(K, 3, rng)
        out = local_search_improve(K, seed, 0, rng)
        assert out is seed

    def test_no_swap_accepted_from_optimal_seed(self):
        for inst in range(10):
            rng = np.random.default_rng(100 + inst)
            X = rng.normal(size=(8, 2))
            K = gram_matrix(KernelSpec("gaussian"), X)
            subset, _ = induced_subset_optimum(K, 2)
            seed = seeding_from_centers(K, subset)
            out = local_search_improve(K, seed, 100, rng)
            assert out.swaps_accepted == 0
            assert np.array_equal(out.center_indices, seed.center_indices)

    def test_cost_never_increases_and_beats_seed(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n, k = int(rng.integers(8, 20)), int(rng.integers(2, 5))
            X = rng.normal(size=(n, 2))
            K = gram_matrix(KernelSpec("gaussian"), X)
            seed = kernel_kmeanspp(K, k, rng)
            out = local_search_improve(K, seed, 25 * k, rng)
            assert out.cost <= seed.cost + 1e-12

    def test_tiny_instances_close_to_subset_optimum(self):
        good = 0
        for inst in range(100):
            rng = np.random.default_rng(500 + inst)
            n, k = int(rng.integers(6, 11)), int(rng.integers(2, 4))
            X = rng.normal(size=(n, 2))
            K = gram_matrix(KernelSpec("gaussian"), X)
            seed = kernel_kmeanspp(K, k, rng)
            out = local_search_improve(K, seed, 25 * k, rng)
            assert out.cost <= seed.cost + 1e-12
            if out.cost <= 1.2 * discrete_subset_optimum(K, k) + 1e-12:
                good += 1
        assert good >= 95


class TestApproximateErm:
    def test_k_equals_n_cost_zero(self):
        rng = np.random.default_rng(3)
        K = gram_matrix(KernelSpec("gaussian"), rng.normal(size=(6, 2)))
        _, cost = approximate_erm(K, 6, rng=rng)
        assert cost == pytest.approx(0.0, abs=1e-12)

    def test_recovers_two_blobs(self):
        from itertools import permutations

        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            X = two_blob_points(16, separation=10.0, spread=1.0, rng=rng)
            K = gram_matrix(KernelSpec("gaussian", bandwidth=4.0), X)
            a, _ = approximate_erm(K, 2, rng=rng)
            truth = blob_labels(16)
            if any(
                np.array_equal(np.asarray(p)[truth], np.asarray(a.labels))
                for p in permutations(range(2))
            ):
                hits += 1
        assert hits >= 99

    def test_beta_ratio_against_brute_force(self):
        close = 0
        for inst in range(200):
            rng = np.random.default_rng(9000 + inst)
            n, k = int(rng.integers(5, 9)), int(rng.integers(2, 4))
            X = rng.normal(size=(n, 2))
            K = gram_matrix(KernelSpec("gaussian"), X)
            _, opt = brute_force_erm(K, k)
            _, cost = approximate_erm(K, k, lloyd_refine=True, rng=rng)
            assert cost >= opt - 1e-10
            if opt < 1e-15:
                close += cost < 1e-12
            elif cost <= 1.1 * opt:
                close += 1
        assert close >= 180  # 90% of 200
