"""Kernel evaluation, Gram matrices, and spectral quantities.

The Gram matrix is the single geometry oracle for everything downstream:
clustering costs, landmark embeddings, and risk evaluation all reduce to
algebra on its entries.  Feature vectors are never materialized here; the
squared feature-space distance comes from the polarization identity

    ||phi_i - phi_j||^2 = K_ii - 2 K_ij + K_jj.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._common import fmt12
from .errors import (
    IndexOutOfRange,
    InvalidDecayParams,
    NonFiniteInput,
    NormalizationViolated,
    SpectralFailure,
)

__all__ = [
    "KernelSpec",
    "GramMatrix",
    "Spectrum",
    "gram_matrix",
    "kernel_dist_sq",
    "spectrum_of",
    "effective_dimension",
    "eigendecay_xi_bound",
    "gram_to_csv",
]

_FAMILIES = ("gaussian", "linear", "polynomial")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its parameters.

    ``normalize`` asserts the unit-ball feature assumption kappa(x, x) <= 1:
    Gaussian kernels satisfy it automatically, linear and polynomial kernels
    are checked at Gram construction and rejected rather than rescaled, so
    the assumption stays auditable.
    """

    family: str
    bandwidth: float = 1.0
    degree: int = 2
    offset: float = 0.0
    normalize: bool = False

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "gaussian" and not self.bandwidth > 0:
            raise ValueError("gaussian bandwidth must be positive")
        if self.family == "polynomial":
            if int(self.degree) != self.degree or self.degree < 1:
                raise ValueError("polynomial degree must be an integer >= 1")
            if self.offset < 0:
                raise ValueError("polynomial offset must be nonnegative")

    def __call__(self, x, y) -> float:
        """Evaluate kappa(x, y) on a single pair of points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.family == "gaussian":
            d2 = float(np.sum((x - y) ** 2))
            return math.exp(-d2 / (2.0 * self.bandwidth**2))
        if self.family == "linear":
            return float(np.dot(x, y))
        return float((np.dot(x, y) + self.offset) ** self.degree)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric PSD kernel matrix with a cached diagonal.

    Immutable after construction; safe to share across workers.
    """

    entries: np.ndarray
    diag: np.ndarray = field(repr=False)
    n: int

    @classmethod
    def from_entries(cls, entries: np.ndarray, validate_psd: bool = False) -> "GramMatrix":
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("Gram matrix must be square")
        # exact symmetry so the stored matrix equals its transpose bitwise
        entries = 0.5 * (entries + entries.T)
        entries.setflags(write=False)
        diag = np.ascontiguousarray(np.diagonal(entries))
        diag.setflags(write=False)
        gm = cls(entries=entries, diag=diag, n=entries.shape[0])
        if validate_psd:
            gm.require_psd()
        return gm

    def require_psd(self, tol: float = 1e-8) -> None:
        """Raise if the smallest eigenvalue is below -tol * largest."""
        vals = _eigvalsh(self.entries)
        top = max(float(vals[-1]), 0.0)
        if float(vals[0]) < -tol * max(top, 1.0) - 1e-30:
            raise ValueError(
                f"matrix is not PSD within tolerance: lambda_min={vals[0]:.3e}"
            )


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted nonincreasing, negatives clamped to zero."""

    eigenvalues: np.ndarray

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        vals = np.sort(np.asarray(values, dtype=float))[::-1]
        vals = np.clip(vals, 0.0, None)
        vals.setflags(write=False)
        return cls(eigenvalues=vals)


def _eigvalsh(entries: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(entries)
    except np.linalg.LinAlgError as exc:
        raise SpectralFailure(str(exc)) from exc


def gram_matrix(spec: KernelSpec, X) -> GramMatrix:
    """Build the n x n kernel matrix of a point set.

    ``X`` is an (n, d) array (a 1-d array is treated as n scalar points).
    With ``spec.normalize`` set, any point whose feature norm exceeds 1 is
    rejected with :class:`NormalizationViolated`.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty (n, d) array")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("input points contain non-finite values")

    inner = X @ X.T
    sq = np.diagonal(inner)
    if spec.family == "gaussian":
        d2 = sq[:, None] + sq[None, :] - 2.0 * inner
        np.clip(d2, 0.0, None, out=d2)
        K = np.exp(-d2 / (2.0 * spec.bandwidth**2))
    elif spec.family == "linear":
        K = inner
    else:
        K = (inner + spec.offset) ** spec.degree

    if spec.normalize and spec.family != "gaussian":
        if np.any(np.diagonal(K) > 1.0 + 1e-12):
            raise NormalizationViolated(
                "normalization flag set but some kappa(x, x) > 1"
            )
    return GramMatrix.from_entries(K)


def kernel_dist_sq(K: GramMatrix, i: int, j: int) -> float:
    """Squared feature-space distance between points i and j, clamped at 0."""
    n = K.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"indices ({i}, {j}) outside [0, {n})")
    val = K.diag[i] - 2.0 * K.entries[i, j] + K.diag[j]
    return max(float(val), 0.0)


def dists_to_points(K: GramMatrix, idx) -> np.ndarray:
    """All-points squared distances to a set of data points (n x len(idx))."""
    idx = np.asarray(idx, dtype=int)
    d = K.diag[:, None] - 2.0 * K.entries[:, idx] + K.diag[idx][None, :]
    return np.clip(d, 0.0, None)


def spectrum_of(K: GramMatrix) -> Spectrum:
    """Eigenvalue spectrum of a Gram matrix (clamped, nonincreasing)."""
    return Spectrum.from_values(_eigvalsh(K.entries))


def effective_dimension(K) -> float:
    """Trace of K (K + I)^{-1}, i.e. the sum of lambda / (lambda + 1).

    Accepts a :class:`GramMatrix` or an already-computed :class:`Spectrum`.
    Negative floating-point eigenvalues are clamped to zero first, since the
    exact matrix is PSD.
    """
    if isinstance(K, Spectrum):
        vals = K.eigenvalues
    else:
        vals = spectrum_of(K).eigenvalues
    return float(np.sum(vals / (vals + 1.0)))


def eigendecay_xi_bound(c: float, alpha: float, k: int) -> float:
    """Effective-dimension cap (1 + c / (alpha - 1)) sqrt(k) under the
    polynomial eigenvalue-decay assumption lambda_i <= c i^{-alpha}."""
    if not alpha > 1:
        raise InvalidDecayParams(f"alpha must exceed 1, got {alpha}")
    if not c > 0:
        raise InvalidDecayParams(f"c must be positive, got {c}")
    if k < 1:
        raise InvalidDecayParams(f"k must be >= 1, got {k}")
    return (1.0 + c / (alpha - 1.0)) * math.sqrt(k)


def gram_to_csv(K: GramMatrix, path) -> None:
    """Dump the full matrix row-major to CSV (debugging aid)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"c{j}" for j in range(K.n)) + "\n")
        for row in K.entries:
            fh.write(",".join(fmt12(v) for v in row) + "\n")
