"""Numerical checks on sign-weighted clustering complexity.

The supremum over all center collections is uncomputable, so the lab works
with two tractable restrictions:

  * the single-center class over the unit ball, whose sign-weighted supremum
    has a closed form per sign draw (see :func:`signed_scatter_supremum`);
  * explicit finite classes of center collections, where both the sign
    expectation and the class supremum can be enumerated exactly at small n.

Together these bracket the general bound: the basis-vector construction of
:func:`lower_bound_construction` pushes the finite-class value up to
sqrt(k n / 2) while its per-coordinate value stays below 3 sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._common import ensure_rng
from .errors import (
    EnumerationTooLarge,
    InvalidLogArgument,
    NormViolation,
    NotDivisible,
)

__all__ = [
    "RadEstimate",
    "LowerBoundInstance",
    "KhintchineResult",
    "signed_scatter_supremum",
    "coordinate_rad",
    "lower_bound_construction",
    "finite_class_rad",
    "khintchine_check",
    "theorem_bound_value",
]

_EXACT_PATTERN_LIMIT = 2**20  # auto-enumerate sign patterns up to this many
_EXACT_CLASS_LIMIT = 2**16


@dataclass(frozen=True)
class RadEstimate:
    """Complexity value with its Monte Carlo standard error.

    ``exact`` is set when full sign-pattern enumeration replaced sampling, in
    which case ``std_error`` is zero and ``trials`` counts the patterns.
    """

    value: float
    std_error: float
    trials: int
    exact: bool


@dataclass(frozen=True)
class LowerBoundInstance:
    """Basis-vector dataset: n/k copies of each of e_1 .. e_k, paired with
    the 2^k center collections (s_1 e_1, ..., s_k e_k), s in {-1, +1}^k."""

    k: int
    n: int
    data: np.ndarray
    class_size: int

    def center_sets(self) -> np.ndarray:
        """(2^k, k, k) array; member s has centers s_j e_j."""
        signs = _sign_block(0, self.class_size, self.k)
        return signs[:, :, None] * np.eye(self.k)[None, :, :]


class KhintchineResult(NamedTuple):
    lhs: float
    rhs: float


def _sign_block(start: int, stop: int, n: int) -> np.ndarray:
    """Rows are the +-1 patterns of the integers [start, stop) over n bits."""
    codes = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (codes >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).astype(float)


def signed_scatter_supremum(data: np.ndarray, sigma: np.ndarray) -> float:
    """Exact sup over unit-ball centers c of sum_j sigma_j ||phi_j - c||^2.

    With s = sum sigma_j, v = sum sigma_j phi_j and base = sum sigma_j
    ||phi_j||^2, the inner maximum of s ||c||^2 - 2 <v, c> over ||c|| <= 1 is
    s + 2||v|| when s >= 0 or ||v|| > |s|, and ||v||^2 / |s| otherwise
    (attained inside the ball; the s < 0, v = 0 corner gives 0 at c = 0).
    """
    data = np.asarray(data, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    s = float(sigma.sum())
    v = sigma @ data
    nv = float(np.linalg.norm(v))
    base = float(sigma @ np.einsum("ij,ij->i", data, data))
    if s >= 0.0 or nv > -s:
        inner = s + 2.0 * nv
    else:
        inner = nv * nv / (-s)
    return base + inner


def _batch_suprema(data: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`signed_scatter_supremum` over rows of ``signs``."""
    norms2 = np.einsum("ij,ij->i", data, data)
    s = signs.sum(axis=1)
    V = signs @ data
    nv = np.linalg.norm(V, axis=1)
    base = signs @ norms2
    at_boundary = (s >= 0.0) | (nv > -s)
    inner = np.where(
        at_boundary,
        s + 2.0 * nv,
        nv**2 / np.where(at_boundary, 1.0, -s),
    )
    return base + inner


def coordinate_rad(data, trials: int = 10_000, rng=None, exact: bool | None = None) -> RadEstimate:
    """Sign expectation of the unit-ball single-center supremum.

    Every feature vector must lie in the unit ball (checked, tolerance
    1e-9).  The per-draw supremum is closed form; the expectation over sign
    vectors is enumerated exactly when 2^n <= 2^20 (the default), otherwise
    estimated by Monte Carlo with ``trials`` draws.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    norms = np.linalg.norm(data, axis=1)
    if np.any(norms > 1.0 + 1e-9):
        raise NormViolation(f"feature norms must be <= 1, max was {norms.max():.6g}")

    if exact is None:
        exact = 2**n <= _EXACT_PATTERN_LIMIT
    if exact:
        if 2**n > _EXACT_PATTERN_LIMIT:
            raise EnumerationTooLarge(f"2^{n} sign patterns exceed the exact limit")
        total = 0.0
        count = 2**n
        step = 2**14
        for start in range(0, count, step):
            signs = _sign_block(start, min(start + step, count), n)
            total += float(_batch_suprema(data, signs).sum())
        return RadEstimate(value=total / count, std_error=0.0, trials=count, exact=True)

    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = ensure_rng(rng)
    signs = 2.0 * rng.integers(0, 2, size=(trials, n)) - 1.0
    vals = _batch_suprema(data, signs)
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RadEstimate(value=float(vals.mean()), std_error=se, trials=trials, exact=False)


def lower_bound_construction(k: int, n: int) -> LowerBoundInstance:
    """Dataset of n/k copies of each basis vector, with its 2^k sign classes."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 1 or n % k != 0:
        raise NotDivisible(f"n={n} is not a positive multiple of k={k}")
    data = np.repeat(np.eye(k), n // k, axis=0)
    data.setflags(write=False)
    return LowerBoundInstance(k=k, n=n, data=data, class_size=2**k)


def _min_dist_table(data: np.ndarray, center_sets) -> np.ndarray:
    """(C, n) table of min-over-centers squared distances per class."""
    norms2 = np.einsum("ij,ij->i", data, data)
    rows = []
    for centers in center_sets:
        centers = np.asarray(centers, dtype=float)
        csq = np.einsum("ij,ij->i", centers, centers)
        d = norms2[:, None] - 2.0 * (data @ centers.T) + csq[None, :]
        rows.append(np.clip(d, 0.0, None).min(axis=1))
    return np.asarray(rows)


def finite_class_rad(
    data,
    center_sets,
    trials: int = 10_000,
    rng=None,
    exact: bool = False,
) -> RadEstimate:
    """Sign expectation of the max over an explicit finite class.

    Exact mode enumerates all 2^n sign vectors in complementary pairs, so a
    single-member class comes out exactly zero; it is guarded to n <= 20 and
    at most 2^16 classes.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    V = _min_dist_table(data, center_sets)
    if V.shape[0] == 0:
        raise ValueError("center_sets must be nonempty")

    if exact:
        if n > 20 or V.shape[0] > _EXACT_CLASS_LIMIT:
            raise EnumerationTooLarge(
                f"exact enumeration refused for n={n}, classes={V.shape[0]}"
            )
        half = 2 ** (n - 1)
        total = 0.0
        step = 2**14
        for start in range(0, half, step):
            # patterns with sigma_n = +1; the complement supplies the rest
            signs = _sign_block(start, min(start + step, half), n)
            U = V @ signs.T
            total += float((U.max(axis=0) + (-U).max(axis=0)).sum())
        return RadEstimate(value=total / 2**n, std_error=0.0, trials=2**n, exact=True)

    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = ensure_rng(rng)
    signs = 2.0 * rng.integers(0, 2, size=(trials, n)) - 1.0
    vals = (V @ signs.T).max(axis=0)
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RadEstimate(value=float(vals.mean()), std_error=se, trials=trials, exact=False)


def khintchine_check(block: int, trials: int | None = None, rng=None) -> KhintchineResult:
    """Half the expected absolute sign sum over a block, against sqrt(block/8).

    Exact for block <= 20 via the binomial distribution of the sign sum;
    Monte Carlo with ``trials`` draws (default 10^4) beyond that.
    """
    if block < 1:
        raise ValueError("block must be >= 1")
    if block <= 20:
        num = sum(math.comb(block, j) * abs(2 * j - block) for j in range(block + 1))
        lhs = num / 2 ** (block + 1)
    else:
        rng = ensure_rng(rng)
        trials = 10_000 if trials is None else trials
        sums = (2.0 * rng.integers(0, 2, size=(trials, block)) - 1.0).sum(axis=1)
        lhs = 0.5 * float(np.abs(sums).mean())
    return KhintchineResult(lhs=float(lhs), rhs=math.sqrt(block / 8.0))


def theorem_bound_value(
    k: int,
    n: int,
    max_coord_rad: float,
    delta_exponent: float,
    c_const: float,
) -> float:
    """Upper-bound formula c * sqrt(k) * R * log^{3/2 + d}(n / R) with R the
    largest per-coordinate complexity.  Only ordering and scaling of this
    value are meaningful; the constants are caller-supplied."""
    if not max_coord_rad > 0 or not n > max_coord_rad:
        raise InvalidLogArgument(
            f"need 0 < max_coord_rad < n, got {max_coord_rad} and {n}"
        )
    log_term = math.log(n / max_coord_rad)
    return c_const * math.sqrt(k) * max_coord_rad * log_term ** (1.5 + delta_exponent)
