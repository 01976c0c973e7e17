"""Landmark sampling, Nystrom embedding, and clustering on the embedded data.

A landmark set spans a subspace of the feature space; the embedding maps
every point to coordinates of its orthogonal projection onto that span,
together with the squared projection residual.  For any center c inside the
span, the Pythagorean split

    ||phi_i - c||^2 = ||z_i - z_c||^2 + residual_i

makes clustering with span-restricted centers an ordinary Euclidean problem
on the coordinates plus a fixed offset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._common import ensure_rng
from .clustering import Assignment, ClusterCostTrace, random_assignment
from .errors import (
    EmptyCluster,
    InvalidDelta,
    MissingXi,
    MTooLarge,
    SingularLandmarkBlockWarning,
)
from .kernels import GramMatrix

__all__ = [
    "LandmarkSet",
    "EmbeddedDataset",
    "sample_landmarks_uniform",
    "landmark_size",
    "nystrom_embed",
    "nystrom_kkmeans",
    "euclidean_lloyd",
    "euclidean_kmeanspp_labels",
    "landmark_coefficients",
]

_EIG_CUTOFF = 1e-10


@dataclass(frozen=True)
class LandmarkSet:
    """m distinct point indices, sorted ascending."""

    indices: np.ndarray
    m: int

    @classmethod
    def from_indices(cls, indices, n: int | None = None) -> "LandmarkSet":
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size == 0:
            raise ValueError("landmark set must be nonempty")
        if idx[0] < 0 or (n is not None and idx[-1] >= n):
            raise ValueError("landmark indices out of range")
        idx.setflags(write=False)
        return cls(indices=idx, m=int(idx.size))


@dataclass(frozen=True)
class EmbeddedDataset:
    """Projection coordinates (n x m), per-point squared residuals, and the
    symmetric map from coordinates back to landmark coefficient vectors."""

    coords: np.ndarray
    residuals: np.ndarray
    jitter: float
    coeff_map: np.ndarray
    rank: int


def sample_landmarks_uniform(n: int, m: int, rng=None) -> LandmarkSet:
    """m distinct indices sampled uniformly without replacement."""
    if not 1 <= m <= n:
        raise MTooLarge(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = ensure_rng(rng)
    idx = rng.choice(n, size=m, replace=False)
    return LandmarkSet.from_indices(idx, n=n)


def landmark_size(
    n: int,
    k: int,
    delta: float,
    xi: float | None = None,
    mode: str = "general",
    c_scale: float = 1.0,
) -> int:
    """Prescribed landmark count for a uniform sample, clamped to [1, n].

    Modes:
      * ``general``    ceil(c * sqrt(n) * log(1/delta) * min(k, xi) / sqrt(k))
      * ``eigendecay`` ceil(c * sqrt(n) * log(1/delta))
      * ``linear_k``   ceil(c * sqrt(n) * log(1/delta) * min(k, xi) / k)

    ``xi`` is the effective dimension; pass k when it is unknown.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidDelta(f"delta must be in (0, 1), got {delta}")
    if mode not in ("general", "eigendecay", "linear_k"):
        raise ValueError(f"unknown landmark_size mode {mode!r}")
    if not c_scale > 0:
        raise ValueError("c_scale must be positive")
    base = c_scale * math.sqrt(n) * math.log(1.0 / delta)
    if mode == "eigendecay":
        raw = base
    else:
        if xi is None:
            raise MissingXi(f"mode={mode!r} needs xi (pass k when unknown)")
        raw = base * min(float(k), float(xi))
        raw /= math.sqrt(k) if mode == "general" else float(k)
    return int(min(max(math.ceil(raw), 1), n))


def nystrom_embed(K: GramMatrix, L: LandmarkSet, jitter: float = 0.0) -> EmbeddedDataset:
    """Coordinates of every point's projection onto the landmark span.

    Uses the symmetric pseudo-inverse square root of the landmark block
    (eigenvalues below ``1e-10 * lambda_max`` are dropped) so rank-deficient
    landmark sets are handled; a rank collapse is reported as a
    :class:`SingularLandmarkBlockWarning`, not an error.
    """
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    idx = L.indices
    if idx[-1] >= K.n:
        raise ValueError("landmark indices out of range for this Gram matrix")
    Kmm = K.entries[np.ix_(idx, idx)]
    Knm = K.entries[:, idx]
    A = Kmm if jitter == 0 else Kmm + jitter * np.eye(L.m)

    w, U = np.linalg.eigh(A)
    cutoff = _EIG_CUTOFF * max(float(w[-1]), 0.0)
    keep = w > cutoff
    rank = int(np.count_nonzero(keep))
    if rank < L.m:
        warnings.warn(
            f"landmark block rank {rank} < m={L.m}; projection uses the "
            "stable eigenspace only",
            SingularLandmarkBlockWarning,
            stacklevel=2,
        )
    Uk = U[:, keep]
    inv_sqrt = (Uk / np.sqrt(w[keep])[None, :]) @ Uk.T

    Z = Knm @ inv_sqrt
    residuals = np.clip(K.diag - np.einsum("ij,ij->i", Z, Z), 0.0, None)
    Z.setflags(write=False)
    residuals.setflags(write=False)
    inv_sqrt.setflags(write=False)
    return EmbeddedDataset(
        coords=Z, residuals=residuals, jitter=float(jitter),
        coeff_map=inv_sqrt, rank=rank,
    )


def _zspace_cost(Z: np.ndarray, labels: np.ndarray, k: int) -> float:
    cost = 0.0
    for j in range(k):
        members = Z[labels == j]
        if members.shape[0] == 0:
            raise EmptyCluster(f"cluster {j} is empty")
        mean = members.mean(axis=0)
        cost += float(np.sum((members - mean) ** 2))
    return cost / Z.shape[0]


def _zspace_dists(Z: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    G = (labels[:, None] == np.arange(k)[None, :]).astype(float)
    sizes = G.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        centers = (G.T @ Z) / sizes[:, None]
    sq = np.einsum("ij,ij->i", Z, Z)
    csq = np.einsum("ij,ij->i", centers, centers)
    D = sq[:, None] - 2.0 * (Z @ centers.T) + csq[None, :]
    D[:, sizes == 0] = np.inf
    return np.clip(D, 0.0, None)


def euclidean_lloyd(
    Z: np.ndarray,
    init: Assignment,
    max_iter: int = 300,
    rel_tol: float = 1e-9,
):
    """Plain Lloyd iteration on embedded coordinates; mirrors the kernel-space
    loop (same tie-breaking, empty-cluster repair, and stopping rules)."""
    if np.any(init.cluster_sizes == 0):
        raise EmptyCluster("initial assignment has an empty cluster")
    labels = np.asarray(init.labels, dtype=np.int64).copy()
    k = init.k
    n = Z.shape[0]
    costs = [_zspace_cost(Z, labels, k)]
    converged = False
    iterations = 0

    for _ in range(max_iter):
        D = _zspace_dists(Z, labels, k)
        new_labels = np.argmin(D, axis=1).astype(np.int64)
        sizes = np.bincount(new_labels, minlength=k)
        if np.any(sizes == 0):
            own = D[np.arange(n), new_labels]
            for j in np.flatnonzero(sizes == 0):
                eligible = sizes[new_labels] > 1
                cand = np.where(eligible, own, -np.inf)
                donor = int(np.argmax(cand))
                sizes[new_labels[donor]] -= 1
                new_labels[donor] = j
                sizes[j] += 1
        iterations += 1
        new_cost = _zspace_cost(Z, new_labels, k)
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


def euclidean_kmeanspp_labels(Z: np.ndarray, k: int, rng) -> Assignment:
    """D^2-sampling seeding on Euclidean coordinates; mirrors the kernel-space
    sampler draw for draw so seeded runs line up across the two geometries."""
    n = Z.shape[0]
    rng = ensure_rng(rng)
    centers = [int(rng.integers(n))]
    d2 = np.sum((Z - Z[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            remaining = np.setdiff1d(np.arange(n), np.asarray(centers))
            nxt = int(rng.choice(remaining))
        centers.append(nxt)
        d2 = np.minimum(d2, np.sum((Z - Z[nxt]) ** 2, axis=1))
    Zc = Z[np.asarray(centers)]
    sq = np.einsum("ij,ij->i", Z, Z)
    csq = np.einsum("ij,ij->i", Zc, Zc)
    dists = sq[:, None] - 2.0 * (Z @ Zc.T) + csq[None, :]
    labels = np.argmin(dists, axis=1).astype(np.int64)
    return Assignment.from_labels(labels, k)


def nystrom_kkmeans(
    K: GramMatrix,
    L: LandmarkSet,
    k: int,
    init: str = "kmeanspp",
    rng=None,
    max_iter: int = 300,
    rel_tol: float = 1e-9,
    jitter: float = 0.0,
    init_labels: Assignment | None = None,
):
    """Approximate kernel k-means with centers restricted to the landmark span.

    Runs Euclidean Lloyd on the embedded coordinates.  Returns the final
    assignment, the cost measured in the full feature space (projected cost
    plus the mean projection residual), and the projected cost alone.  Risk
    comparisons should use the in-space cost; the projected cost ignores the
    part of the data outside the landmark span.
    """
    rng = ensure_rng(rng)
    emb = nystrom_embed(K, L, jitter=jitter)
    if init_labels is not None:
        start = init_labels
    elif init == "kmeanspp":
        start = euclidean_kmeanspp_labels(emb.coords, k, rng)
    elif init == "random":
        start = random_assignment(K.n, k, rng)
    else:
        raise ValueError(f"unknown init {init!r}")
    assignment, trace = euclidean_lloyd(emb.coords, start, max_iter=max_iter, rel_tol=rel_tol)
    cost_projected = float(trace.per_iteration_cost[-1])
    cost_in_h = cost_projected + float(np.mean(emb.residuals))
    return assignment, cost_in_h, cost_projected


def landmark_coefficients(emb: EmbeddedDataset, a: Assignment) -> np.ndarray:
    """Cluster-mean centers expressed as coefficient vectors over the
    landmark points (k x m); row j reconstructs center j as a combination of
    landmark features."""
    G = (a.labels[:, None] == np.arange(a.k)[None, :]).astype(float)
    sizes = G.sum(axis=0)
    if np.any(sizes == 0):
        raise EmptyCluster("cannot form a center for an empty cluster")
    z_centers = (G.T @ emb.coords) / sizes[:, None]
    return z_centers @ emb.coeff_map
