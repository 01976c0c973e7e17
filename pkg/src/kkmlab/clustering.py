"""Exact kernel k-means: cost evaluation, Lloyd iteration, brute-force ERM.

Centers are implicit cluster means in feature space, so every quantity is a
Gram-matrix expansion.  The empirical criterion is always normalized by 1/n;
unnormalized sums are never exposed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import ensure_rng, fmt12
from .errors import EmptyCluster, IndexOutOfRange, InstanceTooLarge, KTooLarge
from .kernels import GramMatrix

__all__ = [
    "Assignment",
    "ClusterCostTrace",
    "cluster_cost",
    "point_center_dist_sq",
    "kernel_lloyd",
    "brute_force_erm",
    "random_assignment",
    "assignment_to_csv",
    "iter_label_chunks",
]


@dataclass(frozen=True)
class Assignment:
    """Partition of n points into k clusters (labels in [0, k))."""

    labels: np.ndarray
    k: int
    cluster_sizes: np.ndarray

    @classmethod
    def from_labels(cls, labels, k: int) -> "Assignment":
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a nonempty 1-d array")
        if k < 1:
            raise ValueError("k must be >= 1")
        if labels.min() < 0 or labels.max() >= k:
            raise ValueError(f"labels must lie in [0, {k})")
        sizes = np.bincount(labels, minlength=k).astype(np.int64)
        labels = labels.copy()
        labels.setflags(write=False)
        sizes.setflags(write=False)
        return cls(labels=labels, k=k, cluster_sizes=sizes)

    @property
    def n(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class ClusterCostTrace:
    """Cost after the initial assignment and after each Lloyd step."""

    per_iteration_cost: np.ndarray
    converged: bool
    iterations: int


def _onehot(labels: np.ndarray, k: int) -> np.ndarray:
    return (labels[:, None] == np.arange(k)[None, :]).astype(float)


def _cluster_linkage(K: GramMatrix, labels: np.ndarray, k: int):
    """Per-cluster kernel sums: KG[i, j] = sum_{t in C_j} K_it and
    T[j] = sum_{t, t' in C_j} K_tt'."""
    G = _onehot(labels, k)
    KG = K.entries @ G
    T = np.einsum("ij,ij->j", G, KG)
    sizes = G.sum(axis=0)
    return KG, T, sizes


def cluster_cost(K: GramMatrix, a: Assignment) -> float:
    """Mean squared distance of each point to its cluster's feature mean."""
    if a.n != K.n:
        raise ValueError("assignment and Gram matrix disagree on n")
    if np.any(a.cluster_sizes == 0):
        raise EmptyCluster("cluster_cost needs every cluster populated")
    _, T, sizes = _cluster_linkage(K, a.labels, a.k)
    cost = (float(np.sum(K.diag)) - float(np.sum(T / sizes))) / K.n
    return max(cost, 0.0)


def _point_center_dists(K: GramMatrix, labels: np.ndarray, k: int) -> np.ndarray:
    """(n, k) squared distances to every cluster mean; empty clusters get +inf."""
    KG, T, sizes = _cluster_linkage(K, labels, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        D = K.diag[:, None] - 2.0 * KG / sizes[None, :] + (T / sizes**2)[None, :]
    D[:, sizes == 0] = np.inf
    return np.clip(D, 0.0, None)


def point_center_dist_sq(K: GramMatrix, a: Assignment, i: int, j: int) -> float:
    """Squared distance from point i to the mean of cluster j, clamped at 0."""
    if not 0 <= i < K.n:
        raise IndexOutOfRange(f"point index {i} outside [0, {K.n})")
    if not 0 <= j < a.k:
        raise IndexOutOfRange(f"cluster id {j} outside [0, {a.k})")
    size = int(a.cluster_sizes[j])
    if size == 0:
        raise EmptyCluster(f"cluster {j} is empty")
    members = a.labels == j
    cross = float(K.entries[i, members].sum())
    within = float(K.entries[np.ix_(members, members)].sum())
    val = K.diag[i] - 2.0 * cross / size + within / size**2
    return max(float(val), 0.0)


def _repair_empty(labels: np.ndarray, k: int, dist_to_own: np.ndarray) -> np.ndarray:
    """Move the worst-served point into each empty cluster, one at a time.

    Points that are sole members of their cluster are not eligible donors.
    """
    labels = labels.copy()
    sizes = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(sizes == 0):
        eligible = sizes[labels] > 1
        if not np.any(eligible):
            raise EmptyCluster("cannot repair: no cluster has two points")
        cand = np.where(eligible, dist_to_own, -np.inf)
        donor = int(np.argmax(cand))
        sizes[labels[donor]] -= 1
        labels[donor] = j
        sizes[j] += 1
    return labels


def kernel_lloyd(
    K: GramMatrix,
    init: Assignment,
    max_iter: int = 300,
    rel_tol: float = 1e-9,
):
    """Lloyd iteration in feature space.

    Each step reassigns every point to its nearest implicit centroid (ties
    broken toward the lowest cluster index) and recomputes the means.  A
    cluster that empties is repaired by donating the point currently farthest
    from its own center, which keeps k fixed and never increases the cost.
    Stops when labels are unchanged, the relative cost drop falls below
    ``rel_tol``, or ``max_iter`` is reached.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if rel_tol < 0:
        raise ValueError("rel_tol must be >= 0")
    if init.n != K.n:
        raise ValueError("init and Gram matrix disagree on n")
    if np.any(init.cluster_sizes == 0):
        raise EmptyCluster("initial assignment has an empty cluster")

    labels = np.asarray(init.labels, dtype=np.int64).copy()
    k = init.k
    costs = [cluster_cost(K, Assignment.from_labels(labels, k))]
    converged = False
    iterations = 0

    for _ in range(max_iter):
        D = _point_center_dists(K, labels, k)
        new_labels = np.argmin(D, axis=1).astype(np.int64)
        if np.any(np.bincount(new_labels, minlength=k) == 0):
            own = D[np.arange(K.n), new_labels]
            new_labels = _repair_empty(new_labels, k, own)
        iterations += 1
        new_cost = cluster_cost(K, Assignment.from_labels(new_labels, k))
        costs.append(new_cost)
        unchanged = bool(np.array_equal(new_labels, labels))
        labels = new_labels
        prev = costs[-2]
        drop = (prev - new_cost) / prev if prev > 0 else 0.0
        if unchanged or drop < rel_tol:
            converged = True
            break

    trace = ClusterCostTrace(
        per_iteration_cost=np.asarray(costs),
        converged=converged,
        iterations=iterations,
    )
    return Assignment.from_labels(labels, k), trace


def _iter_exact_partitions(n: int, k: int):
    """Canonical restricted-growth labelings of n items into exactly k blocks."""
    labels = np.zeros(n, dtype=np.int8)

    def rec(i: int, used: int):
        if n - i < k - used:
            return  # cannot open the remaining blocks
        if i == n:
            if used == k:
                yield labels.copy()
            return
        top = min(used + 1, k)
        for b in range(top):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(1, 1)


def iter_label_chunks(n: int, k: int, chunk: int = 4096):
    """Batch exact-k partitions into (B, n) arrays for vectorized scoring."""
    buf = []
    for lab in _iter_exact_partitions(n, k):
        buf.append(lab)
        if len(buf) == chunk:
            yield np.asarray(buf, dtype=np.int64)
            buf = []
    if buf:
        yield np.asarray(buf, dtype=np.int64)


def _chunk_costs(K: np.ndarray, diag_sum: float, chunk_labels: np.ndarray, k: int) -> np.ndarray:
    G = (chunk_labels[:, :, None] == np.arange(k)[None, None, :]).astype(float)
    KG = np.matmul(K, G)
    T = np.einsum("bik,bik->bk", G, KG)
    sizes = G.sum(axis=1)
    return (diag_sum - np.sum(T / sizes, axis=1)) / K.shape[0]


def brute_force_erm(K: GramMatrix, k: int):
    """Exact empirical risk minimizer by exhaustive partition enumeration.

    Restricting centers to cluster means is lossless (the mean minimizes
    within-cluster scatter, and optimal centers lie in the span of the data),
    so enumerating partitions into exactly k nonempty blocks is exact.
    Guarded to n <= 12 and k <= 4.
    """
    n = K.n
    if k > n:
        raise KTooLarge(f"k={k} exceeds n={n}")
    if n > 12 or k > 4:
        raise InstanceTooLarge(f"n={n}, k={k} beyond the n<=12, k<=4 guard")
    if k == n:
        labels = np.arange(n, dtype=np.int64)
        return Assignment.from_labels(labels, k), 0.0

    diag_sum = float(np.sum(K.diag))
    best_cost = np.inf
    best_labels = None
    for chunk in iter_label_chunks(n, k):
        costs = _chunk_costs(K.entries, diag_sum, chunk, k)
        idx = int(np.argmin(costs))
        if costs[idx] < best_cost:
            best_cost = float(costs[idx])
            best_labels = chunk[idx]
    assert best_labels is not None
    return Assignment.from_labels(best_labels, k), max(best_cost, 0.0)


def random_assignment(n: int, k: int, rng=None) -> Assignment:
    """Uniform random labels with every cluster guaranteed nonempty."""
    if k > n:
        raise KTooLarge(f"k={k} exceeds n={n}")
    rng = ensure_rng(rng)
    labels = rng.integers(0, k, size=n)
    anchors = rng.permutation(n)[:k]
    labels[anchors] = np.arange(k)
    return Assignment.from_labels(labels, k)


def assignment_to_csv(a: Assignment, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("point_index,cluster_id\n")
        for i, lab in enumerate(a.labels):
            fh.write(f"{i},{int(lab)}\n")


def trace_to_csv(trace: ClusterCostTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,cost\n")
        for i, c in enumerate(trace.per_iteration_cost):
            fh.write(f"{i},{fmt12(c)}\n")
