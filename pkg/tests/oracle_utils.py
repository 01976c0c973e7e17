"""Shared test oracles, kept independent of the library's own computations."""

import numpy as np


def grid_supremum(data, sigma, rounds=4, res=81):
    """Refining 2-d grid search for sup_{||c||<=1} sum_j sigma_j ||phi_j-c||^2.

    The objective depends on c only through its component along v = sum
    sigma_j phi_j and its norm, so the search runs over the unit disk of the
    2-d span {v_hat, w} and zooms in around the best cell each round.
    Independent of the closed-form branch logic.
    """
    data = np.asarray(data, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    s = float(sigma.sum())
    v = sigma @ data
    nv = float(np.linalg.norm(v))
    base = float(sigma @ np.einsum("ij,ij->i", data, data))

    lo_a, hi_a, lo_b, hi_b = -1.0, 1.0, -1.0, 1.0
    best = -np.inf
    for _ in range(rounds):
        a = np.linspace(lo_a, hi_a, res)
        b = np.linspace(lo_b, hi_b, res)
        A, B = np.meshgrid(a, b, indexing="ij")
        R2 = A**2 + B**2
        g = np.where(R2 <= 1.0, s * R2 - 2.0 * A * nv, -np.inf)
        flat = int(np.argmax(g))
        ia, ib = np.unravel_index(flat, g.shape)
        best = max(best, float(g[ia, ib]))
        ca, cb = a[ia], b[ib]
        half = 2.0 * (hi_a - lo_a) / (res - 1)
        lo_a, hi_a = max(ca - half, -1.0), min(ca + half, 1.0)
        half_b = 2.0 * (hi_b - lo_b) / (res - 1)
        lo_b, hi_b = max(cb - half_b, -1.0), min(cb + half_b, 1.0)
    return base + best
