"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete.  Headline bounds are asymptotic with unspecified
constants, so the checks here are property-based plus desk-scale scaling
bands; every tolerance is pinned in the assertions below.
"""

import math

import numpy as np
import pytest
from oracle_utils import grid_supremum
from scipy.stats import spearmanr

from kkmlab import (
    KernelSpec,
    LandmarkSet,
    MPolicy,
    Spectrum,
    brute_force_erm,
    coordinate_rad,
    effective_dimension,
    eigendecay_xi_bound,
    finite_class_rad,
    gram_matrix,
    kernel_lloyd,
    khintchine_check,
    lower_bound_construction,
    nystrom_kkmeans,
    random_assignment,
    run_cell,
    scaling_fit,
    signed_scatter_supremum,
    standard_benchmark,
)
from kkmlab.cli import main as cli_main
from kkmlab.risk import CellRecord, beta_ratio_study


def _report(name: str, ok: bool, detail: str = "") -> bool:
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{tag}] {name}{suffix}")
    return ok


def test_criterion_01_lloyd_monotonicity():
    violations = 0
    for i in range(1000):
        rng = np.random.default_rng([1, i])
        n = int(rng.integers(10, 201))
        k = int(rng.integers(2, 9))
        X = rng.normal(size=(n, 3))
        spec = KernelSpec("gaussian", bandwidth=0.5 + 2.0 * rng.random()) if i % 2 else KernelSpec("linear")
        K = gram_matrix(spec, X)
        _, trace = kernel_lloyd(K, random_assignment(n, k, rng))
        c = trace.per_iteration_cost
        if not np.all(np.diff(c) <= 1e-9 * np.maximum(c[:-1], 1e-300)):
            violations += 1
    ok = violations == 0
    assert _report("criterion 1: Lloyd cost traces nonincreasing on 1000 instances",
                   ok, f"violations={violations}")


def test_criterion_02_erm_oracle_agreement():
    matches = 0
    beats = 0
    for i in range(100):
        rng = np.random.default_rng([2, i])
        n = int(rng.integers(5, 9))
        k = int(rng.integers(2, 4))
        X = rng.normal(size=(n, 2))
        K = gram_matrix(KernelSpec("gaussian"), X)
        _, opt = brute_force_erm(K, k)
        best = np.inf
        for _ in range(50):
            _, trace = kernel_lloyd(K, random_assignment(n, k, rng))
            best = min(best, float(trace.per_iteration_cost[-1]))
        if best < opt - 1e-10:
            beats += 1
        if best <= opt + 1e-6:
            matches += 1
    ok = matches >= 90 and beats == 0
    assert _report("criterion 2: 50-restart Lloyd matches the exhaustive minimizer",
                   ok, f"matches={matches}/100, impossible_beats={beats}")


def test_criterion_03_lower_bound_construction():
    ok = True
    details = []
    for k, n in ((2, 4), (2, 8), (4, 8), (4, 16)):
        inst = lower_bound_construction(k, n)
        fc = finite_class_rad(inst.data, inst.center_sets(), exact=True)
        coord = coordinate_rad(inst.data, trials=10_000, rng=np.random.default_rng([3, k, n]))
        lower = math.sqrt(k * n / 2.0)
        upper = 3.0 * math.sqrt(n) + 3.0 * coord.std_error
        ok = ok and fc.value >= lower and coord.value <= upper
        details.append(f"({k},{n}): {fc.value:.3f}>={lower:.3f}, {coord.value:.3f}<=3sqrt(n)")
    tiny = finite_class_rad(
        lower_bound_construction(2, 2).data,
        lower_bound_construction(2, 2).center_sets(),
        exact=True,
    )
    ok = ok and abs(tiny.value - 2.0) <= 1e-12
    assert _report("criterion 3: construction beats sqrt(kn/2) while coordinates stay under 3 sqrt(n)",
                   ok, "; ".join(details))


def test_criterion_04_khintchine_cells():
    ok = True
    for block in range(1, 21):
        res = khintchine_check(block)
        ok = ok and res.lhs >= res.rhs
    block4 = khintchine_check(4)
    ok = ok and block4.lhs == 0.75
    assert _report("criterion 4: exhaustive sign-sum averages beat sqrt(block/8) for blocks 1..20",
                   ok, f"block4 lhs={block4.lhs}")


def test_criterion_05_closed_form_matches_grid_search():
    worst = 0.0
    for i in range(1000):
        rng = np.random.default_rng([5, i])
        n = int(rng.integers(2, 12))
        d = int(rng.integers(1, 5))
        data = rng.normal(size=(n, d))
        data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
        sigma = 2.0 * rng.integers(0, 2, size=n) - 1.0
        closed = signed_scatter_supremum(data, sigma)
        worst = max(worst, abs(closed - grid_supremum(data, sigma)))
    ok = worst <= 1e-3
    assert _report("criterion 5: closed-form supremum matches 2-d grid search on 1000 draws",
                   ok, f"worst_abs_err={worst:.2e}")


def test_criterion_06_nystrom_consistency_with_full_landmarks():
    worst = 0.0
    for i in range(100):
        rng = np.random.default_rng([6, i])
        n = int(rng.integers(12, 40))
        k = int(rng.integers(2, 5))
        X = rng.normal(size=(n, 3))
        K = gram_matrix(KernelSpec("gaussian", bandwidth=1.2), X)
        init = random_assignment(n, k, rng)
        _, trace = kernel_lloyd(K, init)
        _, cost_h, _ = nystrom_kkmeans(K, LandmarkSet.from_indices(np.arange(n)), k,
                                       init_labels=init)
        worst = max(worst, abs(cost_h - float(trace.per_iteration_cost[-1])))
    ok = worst <= 1e-8
    assert _report("criterion 6: full-landmark clustering equals the exact path under shared inits",
                   ok, f"worst_abs_diff={worst:.2e}")


def test_criterion_07_landmark_budget_preserves_excess_risk():
    policy = MPolicy(mode="general", c_scale=1.0, delta=0.1)
    overlapping = 0
    total = 0
    details = []
    for k in (2, 4):
        P = standard_benchmark(k)
        for n in (64, 128, 256):
            exact = run_cell(P, n, k, "exact_erm_approx", policy, reps=50, master_seed=2026)
            nys = run_cell(P, n, k, "nystrom", policy, reps=50, master_seed=2026)
            gap = abs(exact.mean_excess_risk - nys.mean_excess_risk)
            band = 2.0 * exact.std_error + 2.0 * nys.std_error
            total += 1
            overlapping += gap <= band
            details.append(f"k={k},n={n}:{'Y' if gap <= band else 'N'}")
    ok = overlapping >= 0.8 * total
    assert _report("criterion 7: prescribed landmark budget matches exact excess risk in >=80% of cells",
                   ok, f"{overlapping}/{total} overlap; " + ",".join(details))


def test_criterion_08_scaling_exponents():
    # synthetic exact log-linear fixtures first
    fix_n = [CellRecord(n, 2, "exact_erm_approx", 0.0, 1, 0.0, 0.0, 0.0, True,
                        3.0 * n**-0.5, 0.0, 0.0) for n in (64, 128, 256, 512)]
    slope_n, _ = scaling_fit(fix_n, "n")
    fix_k = [CellRecord(128, k, "exact_erm_approx", 0.0, 1, 0.0, 0.0, 0.0, True,
                        0.4 * k**0.5, 0.0, 0.0) for k in (2, 4, 8)]
    slope_k, _ = scaling_fit(fix_k, "k")
    fixtures_ok = abs(slope_n + 0.5) <= 1e-12 and abs(slope_k - 0.5) <= 1e-12

    P = standard_benchmark(2)
    cells = [run_cell(P, n, 2, "exact_erm_approx", reps=50, master_seed=2026)
             for n in (64, 128, 256, 512)]
    expo, half = scaling_fit(cells, "n")
    band_ok = -0.7 <= expo <= -0.3

    ns = [c.n for c in cells]
    rho_excess = spearmanr(ns, [c.mean_excess_risk for c in cells]).statistic
    rho_gap = spearmanr(ns, [c.mean_generalization_gap for c in cells]).statistic
    shrink_ok = rho_excess < 0 and rho_gap < 0

    ok = fixtures_ok and band_ok and shrink_ok
    assert _report("criterion 8: excess-risk slope sits in the [-0.7, -0.3] band",
                   ok, f"exponent={expo:.3f}+-{half:.3f}, fixtures"
                       f"={'ok' if fixtures_ok else 'bad'}, spearman<0={shrink_ok}")


def test_criterion_09_effective_dimension():
    ok = True
    for n in (2, 10, 100):
        K = gram_matrix(KernelSpec("linear"), np.eye(n))
        ok = ok and effective_dimension(K) == n / 2
    i = np.arange(1, 1001, dtype=float)
    xi = effective_dimension(Spectrum.from_values(i**-2.0))
    oracle = float(np.sum(1.0 / (i**2 + 1.0)))  # direct summation, term by term
    bound = eigendecay_xi_bound(1.0, 2.0, 1)
    ok = ok and abs(xi - oracle) <= 1e-3 and xi <= bound and bound == 2.0
    ok = ok and abs(xi - 1.0756745476347482) <= 1e-9
    assert _report("criterion 9: effective dimension matches direct summation and its decay cap",
                   ok, f"xi={xi:.10f}, oracle={oracle:.10f}")


def test_criterion_10_beta_ratio_study():
    P = standard_benchmark(2)
    summary = beta_ratio_study(P, 200, rng=np.random.default_rng(10))
    ok = bool(np.all(summary.ratios >= 1.0 - 1e-10)) and summary.p95 <= 1.2
    assert _report("criterion 10: approximate solver stays within ratio 1.2 of exhaustive optimum",
                   ok, f"p95={summary.p95:.4f}, max={summary.max:.4f}")


def test_criterion_11_min_is_one_lipschitz():
    rng = np.random.default_rng(11)
    ok = True
    for k in (1, 2, 3, 5, 8):
        u = rng.normal(size=(20_000, k)) * rng.uniform(0.1, 50.0, size=(20_000, 1))
        v = rng.normal(size=(20_000, k)) * rng.uniform(0.1, 50.0, size=(20_000, 1))
        lhs = np.abs(u.min(axis=1) - v.min(axis=1))
        rhs = np.abs(u - v).max(axis=1)
        ok = ok and bool(np.all(lhs <= rhs))
    assert _report("criterion 11: min is 1-Lipschitz in the sup norm on 10^5 random pairs", ok)


RISK_SCAN_CONFIG = """
[kernel]
family = gaussian
bandwidth = 1.0

[sweep]
n_values = 48, 96
k_values = 2
methods = exact, nystrom
reps = 8
m_mode = general

[run]
master_seed = 77
output_dir = {out}
"""


def test_criterion_12_risk_scan_determinism(tmp_path):
    cfg = tmp_path / "scan.cfg"
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    cfg.write_text(RISK_SCAN_CONFIG.format(out=out1), encoding="utf-8")
    rc1 = cli_main(["risk-scan", "--config", str(cfg)])
    rc2 = cli_main(["risk-scan", "--config", str(cfg), "--output-dir", str(out2)])
    same = (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
    ok = same and rc1 in (0, 1) and rc1 == rc2
    assert _report("criterion 12: identical config and seed give byte-identical reports",
                   ok, f"exit_codes=({rc1},{rc2})")
