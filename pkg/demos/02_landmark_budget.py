"""Walkthrough: landmark embeddings and the prescribed sampling budgets.

Shows how the projection residuals shrink as the landmark set grows, and
prints the landmark counts the three prescriptions give for a range of
sample sizes.
"""

import numpy as np

from kkmlab import (
    KernelSpec,
    effective_dimension,
    gram_matrix,
    landmark_size,
    nystrom_embed,
    nystrom_kkmeans,
    sample_landmarks_uniform,
)
from kkmlab.datasets import two_blob_points

rng = np.random.default_rng(1)
X = two_blob_points(200, separation=6.0, spread=1.2, rng=rng)
K = gram_matrix(KernelSpec("gaussian", bandwidth=2.0), X)
xi = effective_dimension(K)
print(f"n={K.n}, effective dimension of the Gram matrix: {xi:.3f}")

print("\nmean squared projection residual by landmark count:")
for m in (2, 5, 10, 20, 50, 200):
    emb = nystrom_embed(K, sample_landmarks_uniform(K.n, m, np.random.default_rng(7)))
    print(f"  m={m:<4d} mean residual = {float(np.mean(emb.residuals)):.6f}")

print("\nprescribed landmark counts (delta=0.1, c_scale=1):")
print(f"  {'n':>6} {'general':>8} {'eigendecay':>11} {'linear_k':>9}")
k = 2
for n in (100, 400, 1600, 6400):
    row = [
        landmark_size(n, k, 0.1, xi=xi, mode="general"),
        landmark_size(n, k, 0.1, mode="eigendecay"),
        landmark_size(n, k, 0.1, xi=xi, mode="linear_k"),
    ]
    print(f"  {n:>6} {row[0]:>8} {row[1]:>11} {row[2]:>9}")

# clustering on the embedded coordinates: full-space cost vs projected cost
L = sample_landmarks_uniform(K.n, 20, rng)
labels, cost_in_h, cost_projected = nystrom_kkmeans(K, L, 2, rng=rng)
print(f"\nclustering with m=20 landmarks: cost_in_space={cost_in_h:.6f} "
      f"(projected part {cost_projected:.6f})")
