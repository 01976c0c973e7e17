"""Excess-clustering-risk experiments on finite-support distributions.

Making the data distribution finite-support (atoms plus weights) keeps every
population quantity exactly computable: fitted centers always lie in the
span of the sampled points, hence in the span of the atoms, so their
population risk reduces to algebra on the atom Gram matrix.
"""

from __future__ import annotations

import math
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._common import ensure_rng, fmt12
from .clustering import brute_force_erm, iter_label_chunks
from .errors import (
    CoefficientDimensionMismatch,
    NonPositiveRisk,
    SingularLandmarkBlockWarning,
)
from .kernels import GramMatrix, KernelSpec, effective_dimension, gram_matrix
from .nystrom import (
    euclidean_kmeanspp_labels,
    euclidean_lloyd,
    landmark_coefficients,
    landmark_size,
    nystrom_embed,
    sample_landmarks_uniform,
)
from .seeding import approximate_erm

__all__ = [
    "DistributionSpec",
    "OptimalRisk",
    "MPolicy",
    "CellRecord",
    "RiskReport",
    "BetaRatioSummary",
    "population_risk",
    "optimal_risk",
    "run_cell",
    "scaling_fit",
    "beta_ratio_study",
    "standard_benchmark",
]

METHODS = ("exact_erm_approx", "nystrom", "approx_erm")

_EXACT_ERM_RESTARTS = 20
_SURROGATE_RUNS = 200

# Geometry of the standard benchmark: per fitted cluster count k, k atom
# clouds of 6 atoms each on the unit sphere.  The spread is wide enough that
# several partitions of the atoms stay nearly tied, which keeps the empirical
# minimizer fluctuating at desk-scale sample sizes; seed and spread were
# fixed by calibration runs and are part of the benchmark definition.
BENCHMARK_SEED = 11
BENCHMARK_SPREAD = 1.0
BENCHMARK_DIM = 3
BENCHMARK_ATOMS_PER_CLOUD = 6


@dataclass(frozen=True)
class DistributionSpec:
    """Finite-support distribution: atoms, sampling weights, and the kernel
    under which all geometry is measured."""

    atoms: np.ndarray
    weights: np.ndarray
    kernel: KernelSpec
    generator_seed: int | None = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.asarray(self.weights, dtype=float)
        if atoms.shape[0] != weights.shape[0] or atoms.shape[0] < 1:
            raise ValueError("atoms and weights must align and be nonempty")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        atoms = atoms.copy()
        weights = weights.copy()
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if np.any(self.gram.diag > 1.0 + 1e-9):
            raise ValueError("atom feature norms must not exceed 1 under the kernel")

    @cached_property
    def gram(self) -> GramMatrix:
        return gram_matrix(self.kernel, self.atoms)

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]


@dataclass(frozen=True)
class OptimalRisk:
    """Optimal population risk; ``exact`` is False when the value came from
    a seeded multi-restart search instead of partition enumeration."""

    value: float
    exact: bool


@dataclass(frozen=True)
class MPolicy:
    """How the landmark count is chosen per cell: a fixed m, or one of the
    landmark_size modes evaluated on each rep's sample."""

    mode: str = "general"
    m: int | None = None
    c_scale: float = 1.0
    delta: float = 0.1

    def __post_init__(self):
        if self.mode not in ("fixed", "general", "eigendecay", "linear_k"):
            raise ValueError(f"unknown m policy mode {self.mode!r}")
        if self.mode == "fixed" and (self.m is None or self.m < 1):
            raise ValueError("fixed m policy needs m >= 1")

    def describe(self) -> str:
        if self.mode == "fixed":
            return f"fixed:{self.m}"
        return f"{self.mode}:c={fmt12(self.c_scale)}:d={fmt12(self.delta)}"

    def landmarks_for(self, K: GramMatrix, n: int, k: int) -> int:
        if self.mode == "fixed":
            return int(min(max(self.m, 1), n))
        xi = None
        if self.mode in ("general", "linear_k"):
            xi = effective_dimension(K)
        return landmark_size(n, k, self.delta, xi=xi, mode=self.mode, c_scale=self.c_scale)


@dataclass(frozen=True)
class CellRecord:
    n: int
    k: int
    method: str
    m_used: float
    reps: int
    mean_empirical_risk: float
    mean_population_risk: float
    optimal_risk: float
    optimal_exact: bool
    mean_excess_risk: float
    std_error: float
    mean_generalization_gap: float


@dataclass
class RiskReport:
    """Grid of cell records plus optionally fitted scaling exponents."""

    cells: list[CellRecord] = field(default_factory=list)
    fitted_exponents: dict[str, tuple[float, float]] = field(default_factory=dict)

    CSV_COLUMNS = (
        "n,k,method,m_used,reps,mean_empirical_risk,mean_population_risk,"
        "optimal_risk,optimal_exact,mean_excess_risk,std_error,"
        "mean_generalization_gap"
    )

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.CSV_COLUMNS + "\n")
            for c in self.cells:
                fh.write(
                    f"{c.n},{c.k},{c.method},{fmt12(c.m_used)},{c.reps},"
                    f"{fmt12(c.mean_empirical_risk)},{fmt12(c.mean_population_risk)},"
                    f"{fmt12(c.optimal_risk)},{int(c.optimal_exact)},"
                    f"{fmt12(c.mean_excess_risk)},{fmt12(c.std_error)},"
                    f"{fmt12(c.mean_generalization_gap)}\n"
                )


@dataclass(frozen=True)
class BetaRatioSummary:
    max: float
    mean: float
    p95: float
    ratios: np.ndarray


def population_risk(P: DistributionSpec, centers) -> float:
    """Exact expected squared distance to the nearest center.

    ``centers`` is a (k, n_atoms) matrix of coefficient vectors over the
    atoms; center j is sum_a centers[j, a] * phi(atom_a).
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != P.n_atoms:
        raise CoefficientDimensionMismatch(
            f"centers must be (k, {P.n_atoms}), got {centers.shape}"
        )
    K = P.gram
    cross = K.entries @ centers.T
    quad = np.einsum("ki,ij,kj->k", centers, K.entries, centers)
    D = K.diag[:, None] - 2.0 * cross + quad[None, :]
    np.clip(D, 0.0, None, out=D)
    return float(P.weights @ D.min(axis=1))


def _weighted_partition_costs(K: np.ndarray, w: np.ndarray, chunk: np.ndarray, k: int) -> np.ndarray:
    G = (chunk[:, :, None] == np.arange(k)[None, None, :]).astype(float)
    Gw = G * w[None, :, None]
    T = np.einsum("bik,bik->bk", Gw, np.matmul(K, Gw))
    Wc = Gw.sum(axis=1)
    per = np.where(Wc > 0, T / np.where(Wc > 0, Wc, 1.0), 0.0)
    return float(w @ np.diagonal(K)) - per.sum(axis=1)


def _weighted_lloyd_labels(K: GramMatrix, w: np.ndarray, labels: np.ndarray, k: int,
                           max_iter: int = 100) -> np.ndarray:
    """Weight-aware Lloyd polish on the atom set (used by the surrogate)."""
    labels = labels.copy()
    for _ in range(max_iter):
        G = (labels[:, None] == np.arange(k)[None, :]).astype(float)
        Gw = G * w[:, None]
        KGw = K.entries @ Gw
        Wc = Gw.sum(axis=0)
        T = np.einsum("ij,ij->j", Gw, KGw)
        with np.errstate(divide="ignore", invalid="ignore"):
            D = K.diag[:, None] - 2.0 * KGw / Wc[None, :] + (T / Wc**2)[None, :]
        D[:, Wc <= 0] = np.inf
        new_labels = np.argmin(D, axis=1).astype(np.int64)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels


def _weighted_mean_centers(w: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """(k, N) coefficient rows for weighted cluster means; empty clusters get
    the origin (coefficients all zero)."""
    centers = np.zeros((k, w.size))
    for j in range(k):
        members = labels == j
        wj = w[members].sum()
        if wj > 0:
            centers[j, members] = w[members] / wj
    return centers


def optimal_risk(P: DistributionSpec, k: int, surrogate_runs: int = _SURROGATE_RUNS) -> OptimalRisk:
    """Optimal clustering risk of the distribution.

    Exact when the atom count is at most 12 and k at most 4, by weighted
    partition enumeration (optimal centers are weighted cluster means).
    Otherwise a surrogate: the best population risk over ``surrogate_runs``
    seeded approximate fits on the atom set, each polished by a
    weight-aware Lloyd pass.
    """
    N = P.n_atoms
    if k >= N:
        return OptimalRisk(value=0.0, exact=True)
    if N <= 12 and k <= 4:
        best = np.inf
        for chunk in iter_label_chunks(N, k):
            costs = _weighted_partition_costs(P.gram.entries, P.weights, chunk, k)
            best = min(best, float(costs.min()))
        return OptimalRisk(value=max(best, 0.0), exact=True)

    seed_base = 0 if P.generator_seed is None else int(P.generator_seed)
    best = np.inf
    for run in range(surrogate_runs):
        rng = np.random.default_rng([seed_base, 0x5EED, k, run])
        a, _ = approximate_erm(P.gram, k, lloyd_refine=True, rng=rng)
        labels = _weighted_lloyd_labels(P.gram, P.weights, np.asarray(a.labels), k)
        centers = _weighted_mean_centers(P.weights, labels, k)
        best = min(best, population_risk(P, centers))
    return OptimalRisk(value=max(best, 0.0), exact=False)


def _cell_tag(n: int, k: int, method: str, policy: MPolicy) -> int:
    return zlib.crc32(f"{n}|{k}|{method}|{policy.describe()}".encode())


def _sample_centers_to_atoms(gamma_sample: np.ndarray, sample_atoms: np.ndarray, n_atoms: int) -> np.ndarray:
    """Re-express (k, n_sample) coefficients over sample points as
    coefficients over atoms, merging repeated draws of the same atom."""
    out = np.zeros((gamma_sample.shape[0], n_atoms))
    np.add.at(out.T, sample_atoms, gamma_sample.T)
    return out


def _fit_once(K: GramMatrix, k: int, method: str, policy: MPolicy, rng):
    """Fit one sample with the requested method.

    Returns (empirical_cost, sample_coefficients, m_used) where the
    coefficients are (k, n) over the sample points.
    """
    n = K.n
    if method == "exact_erm_approx":
        best_cost = np.inf
        best_labels = None
        for _ in range(_EXACT_ERM_RESTARTS):
            a, cost = approximate_erm(K, k, lloyd_refine=True, rng=rng)
            if cost < best_cost:
                best_cost = cost
                best_labels = a.labels
        G = (best_labels[:, None] == np.arange(k)[None, :]).astype(float)
        gamma = (G / G.sum(axis=0)[None, :]).T
        return best_cost, gamma, 0.0

    if method == "approx_erm":
        a, cost = approximate_erm(K, k, lloyd_refine=True, rng=rng)
        G = (a.labels[:, None] == np.arange(k)[None, :]).astype(float)
        gamma = (G / G.sum(axis=0)[None, :]).T
        return cost, gamma, 0.0

    if method == "nystrom":
        m = policy.landmarks_for(K, n, k)
        L = sample_landmarks_uniform(n, m, rng)
        with warnings.catch_warnings():
            # resampling a finite-support distribution duplicates atoms, so a
            # rank-deficient landmark block is the expected case here
            warnings.simplefilter("ignore", SingularLandmarkBlockWarning)
            emb = nystrom_embed(K, L)
        resid = float(np.mean(emb.residuals))
        best_cost = np.inf
        best_a = None
        for _ in range(_EXACT_ERM_RESTARTS):
            start = euclidean_kmeanspp_labels(emb.coords, k, rng)
            a, trace = euclidean_lloyd(emb.coords, start)
            cost = float(trace.per_iteration_cost[-1]) + resid
            if cost < best_cost:
                best_cost = cost
                best_a = a
        beta = landmark_coefficients(emb, best_a)  # (k, m) over landmark positions
        gamma = np.zeros((k, n))
        np.add.at(gamma.T, L.indices, beta.T)
        return best_cost, gamma, float(m)

    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def run_cell(
    P: DistributionSpec,
    n: int,
    k: int,
    method: str,
    m_policy: MPolicy | None = None,
    reps: int = 50,
    master_seed: int = 0,
    workers: int = 1,
) -> CellRecord:
    """Monte Carlo estimate of one (n, k, method) cell.

    Each rep draws n atoms i.i.d. by weight, fits with the method, and
    evaluates the fitted centers' population risk exactly.  The per-rep RNG
    is derived from (master_seed, cell tag, rep index), so records are
    bit-identical across reruns and independent of ``workers``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    policy = m_policy if m_policy is not None else MPolicy()
    opt = optimal_risk(P, k)
    tag = _cell_tag(n, k, method, policy)

    def one_rep(rep: int):
        rng = np.random.default_rng([master_seed, tag, rep])
        sample_atoms = rng.choice(P.n_atoms, size=n, p=P.weights)
        K = gram_matrix(P.kernel, P.atoms[sample_atoms])
        emp, gamma_sample, m_used = _fit_once(K, k, method, policy, rng)
        gamma = _sample_centers_to_atoms(gamma_sample, sample_atoms, P.n_atoms)
        pop = population_risk(P, gamma)
        return emp, pop, m_used

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_rep, range(reps)))
    else:
        results = [one_rep(r) for r in range(reps)]

    emps = np.array([r[0] for r in results])
    pops = np.array([r[1] for r in results])
    ms = np.array([r[2] for r in results])
    mean_pop = float(pops.mean())
    se = float(pops.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return CellRecord(
        n=n,
        k=k,
        method=method,
        m_used=float(ms.mean()),
        reps=reps,
        mean_empirical_risk=float(emps.mean()),
        mean_population_risk=mean_pop,
        optimal_risk=opt.value,
        optimal_exact=opt.exact,
        mean_excess_risk=mean_pop - opt.value,
        std_error=se,
        mean_generalization_gap=float((pops - emps).mean()),
    )


def scaling_fit(report, axis: str, method: str | None = None,
                k: int | None = None, n: int | None = None):
    """Least-squares slope of log excess risk against log n or log k.

    Cells with nonpositive excess risk are excluded with a warning; at least
    three must remain.  Returns (exponent, half_width) with the half width
    twice the slope's standard error.
    """
    if axis not in ("n", "k"):
        raise ValueError("axis must be 'n' or 'k'")
    cells = report.cells if isinstance(report, RiskReport) else list(report)
    if method is not None:
        cells = [c for c in cells if c.method == method]
    if k is not None:
        cells = [c for c in cells if c.k == k]
    if n is not None:
        cells = [c for c in cells if c.n == n]

    pts = []
    for c in cells:
        if c.mean_excess_risk > 0:
            pts.append((getattr(c, axis), c.mean_excess_risk))
        else:
            warnings.warn(
                f"cell (n={c.n}, k={c.k}, {c.method}) has nonpositive excess "
                "risk and is excluded from the fit",
                stacklevel=2,
            )
    if len(pts) < 3:
        raise NonPositiveRisk(f"need >= 3 positive-excess cells, have {len(pts)}")

    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = len(pts) - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return float(slope), 2.0 * se


def beta_ratio_study(
    P: DistributionSpec,
    instances: int,
    rng=None,
    k: int | None = None,
) -> BetaRatioSummary:
    """Cost ratio of the approximate solver against the exact minimizer over
    tiny sampled instances (n <= 8, k <= 3, so the denominator is exact).

    ``k`` fixes the cluster count; by default each instance draws k in
    {2, 3}.  Samples with fewer distinct points than clusters are redrawn,
    since no k-center solution exists for them.
    """
    rng = ensure_rng(rng)
    ratios = np.empty(instances)
    for i in range(instances):
        n = int(rng.integers(5, 9))
        ki = int(rng.integers(2, 4)) if k is None else k
        for _ in range(100):
            sample_atoms = rng.choice(P.n_atoms, size=n, p=P.weights)
            if np.unique(P.atoms[sample_atoms], axis=0).shape[0] >= ki:
                break
        K = gram_matrix(P.kernel, P.atoms[sample_atoms])
        _, denom = brute_force_erm(K, ki)
        _, num = approximate_erm(K, ki, lloyd_refine=True, rng=rng)
        if denom < 1e-15:
            ratios[i] = 1.0 if num < 1e-12 else np.inf
        else:
            ratios[i] = num / denom
    return BetaRatioSummary(
        max=float(ratios.max()),
        mean=float(ratios.mean()),
        p95=float(np.percentile(ratios, 95)),
        ratios=ratios,
    )


def standard_benchmark(
    k: int,
    bandwidth: float = 1.0,
    seed: int = BENCHMARK_SEED,
    dim: int = BENCHMARK_DIM,
    atoms_per_cloud: int = BENCHMARK_ATOMS_PER_CLOUD,
    spread: float = BENCHMARK_SPREAD,
) -> DistributionSpec:
    """The benchmark family: k atom clouds of ``atoms_per_cloud`` atoms each
    on the unit sphere, uniform weights, Gaussian kernel."""
    rng = np.random.default_rng([seed, k])
    centers = rng.normal(size=(k, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    atoms = []
    for c in centers:
        pts = c[None, :] + spread * rng.normal(size=(atoms_per_cloud, dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        atoms.append(pts)
    atoms = np.vstack(atoms)
    weights = np.full(atoms.shape[0], 1.0 / atoms.shape[0])
    return DistributionSpec(
        atoms=atoms,
        weights=weights,
        kernel=KernelSpec("gaussian", bandwidth=bandwidth),
        generator_seed=seed,
    )
