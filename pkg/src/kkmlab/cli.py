"""Command-line entry point.

Subcommands: cluster, nystrom-embed, rad-check, risk-scan, spectrum.  All
take a config file; flags override single values.  Exit status contract:
0 success, 1 a checked verdict was violated, 2 config or I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from ._common import fmt12
from .clustering import assignment_to_csv, kernel_lloyd, trace_to_csv
from .config import ExperimentConfig, load_config
from .errors import ConfigError, KKMLabError
from .kernels import effective_dimension, gram_matrix, spectrum_of
from .nystrom import (
    euclidean_kmeanspp_labels,
    euclidean_lloyd,
    landmark_size,
    nystrom_embed,
    sample_landmarks_uniform,
)
from .rademacher import (
    coordinate_rad,
    finite_class_rad,
    khintchine_check,
    lower_bound_construction,
)
from .risk import MPolicy, RiskReport, run_cell, scaling_fit, standard_benchmark
from .seeding import kernel_kmeanspp, local_search_improve

_METHOD_ALIASES = {
    "exact": "exact_erm_approx",
    "exact_erm_approx": "exact_erm_approx",
    "nystrom": "nystrom",
    "approx": "approx_erm",
    "approx_erm": "approx_erm",
}


def _resolve_m(cfg: ExperimentConfig, K, k: int) -> int:
    ny = cfg.nystrom
    if ny.mode == "fixed":
        if ny.m is None:
            raise ConfigError("[nystrom] fixed mode needs m")
        return int(min(max(ny.m, 1), K.n))
    xi = effective_dimension(K) if ny.mode in ("general", "linear_k") else None
    return landmark_size(K.n, k, ny.delta, xi=xi, mode=ny.mode, c_scale=ny.c_scale)


def cmd_cluster(cfg: ExperimentConfig) -> int:
    points = cfg.load_points()
    K = gram_matrix(cfg.kernel, points)
    k = cfg.cluster.k
    method = cfg.cluster.method
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)

    extra_lines = []
    if method == "lloyd":
        best = None
        for r in range(cfg.cluster.restarts):
            rng = np.random.default_rng([cfg.master_seed, 0xC1, r])
            seed = kernel_kmeanspp(K, k, rng)
            a, trace = kernel_lloyd(
                K, seed.induced, max_iter=cfg.cluster.max_iter, rel_tol=cfg.cluster.rel_tol
            )
            if best is None or trace.per_iteration_cost[-1] < best[1].per_iteration_cost[-1]:
                best = (a, trace)
        assignment, trace = best
        final_cost = float(trace.per_iteration_cost[-1])
    elif method == "approx":
        rng = np.random.default_rng([cfg.master_seed, 0xC2])
        rounds = cfg.cluster.rounds if cfg.cluster.rounds is not None else 25 * k
        seed = kernel_kmeanspp(K, k, rng)
        improved = local_search_improve(K, seed, rounds, rng)
        assignment, trace = kernel_lloyd(
            K, improved.induced, max_iter=cfg.cluster.max_iter, rel_tol=cfg.cluster.rel_tol
        )
        final_cost = float(trace.per_iteration_cost[-1])
        extra_lines.append(f"swaps_accepted: {improved.swaps_accepted}")
    elif method == "nystrom":
        m = _resolve_m(cfg, K, k)
        rng = np.random.default_rng([cfg.master_seed, 0xC3])
        L = sample_landmarks_uniform(K.n, m, rng)
        emb = nystrom_embed(K, L, jitter=cfg.nystrom.jitter)
        start = euclidean_kmeanspp_labels(emb.coords, k, rng)
        assignment, ztrace = euclidean_lloyd(
            emb.coords, start, max_iter=cfg.cluster.max_iter, rel_tol=cfg.cluster.rel_tol
        )
        resid = float(np.mean(emb.residuals))
        # report the in-space cost: projected trace plus the residual offset
        from dataclasses import replace

        trace = replace(ztrace, per_iteration_cost=ztrace.per_iteration_cost + resid)
        final_cost = float(trace.per_iteration_cost[-1])
        extra_lines.append(f"m: {m}")
        extra_lines.append(f"cost_projected: {fmt12(ztrace.per_iteration_cost[-1])}")
    else:
        raise ConfigError(f"unknown cluster method {method!r}")

    assignment_to_csv(assignment, out / "assignment.csv")
    trace_to_csv(trace, out / "trace.csv")
    lines = [
        f"method: {method}",
        f"n: {K.n}",
        f"k: {k}",
        f"final_cost: {fmt12(final_cost)}",
        f"iterations: {trace.iterations}",
        f"converged: {trace.converged}",
        *extra_lines,
    ]
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"cluster: n={K.n} k={k} method={method} final_cost={fmt12(final_cost)}")
    return 0


def cmd_spectrum(cfg: ExperimentConfig) -> int:
    points = cfg.load_points()
    K = gram_matrix(cfg.kernel, points)
    sp = spectrum_of(K)
    xi = effective_dimension(sp)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "spectrum.csv", "w", encoding="utf-8") as fh:
        fh.write("index,eigenvalue\n")
        for i, v in enumerate(sp.eigenvalues):
            fh.write(f"{i},{fmt12(v)}\n")
    k = cfg.cluster.k
    print(f"n={K.n} k={k} effective_dimension={fmt12(xi)}")
    print("eigenvalues: " + ",".join(fmt12(v) for v in sp.eigenvalues))
    print("mode,m")
    for mode in ("general", "eigendecay", "linear_k"):
        m = landmark_size(
            K.n, k, cfg.nystrom.delta,
            xi=xi if mode != "eigendecay" else None,
            mode=mode, c_scale=cfg.nystrom.c_scale,
        )
        print(f"{mode},{m}")
    return 0


def cmd_nystrom_embed(cfg: ExperimentConfig) -> int:
    points = cfg.load_points()
    K = gram_matrix(cfg.kernel, points)
    m = _resolve_m(cfg, K, cfg.cluster.k)
    rng = np.random.default_rng([cfg.master_seed, 0xE3])
    L = sample_landmarks_uniform(K.n, m, rng)
    emb = nystrom_embed(K, L, jitter=cfg.nystrom.jitter)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "embedded.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(f"z{j}" for j in range(L.m)) + ",residual\n")
        for row, res in zip(emb.coords, emb.residuals):
            fh.write(",".join(fmt12(v) for v in row) + f",{fmt12(res)}\n")
    print(f"nystrom-embed: n={K.n} m={m} rank={emb.rank} "
          f"mean_residual={fmt12(float(np.mean(emb.residuals)))}")
    return 0


def cmd_rad_check(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    violated = False
    print("k,n,estimator,value,std_error,trials,bound,verdict")
    for k, n in cfg.lab.grid:
        if n % k != 0:
            print(f"# cell (k={k}, n={n}) skipped: n is not divisible by k")
            continue
        inst = lower_bound_construction(k, n)
        exact_ok = n <= 20 and inst.class_size <= 2**16
        if exact_ok:
            fc = finite_class_rad(inst.data, inst.center_sets(), exact=True)
        else:
            print(f"# cell (k={k}, n={n}): exact enumeration too large, "
                  f"falling back to {cfg.lab.trials} Monte Carlo trials")
            fc = finite_class_rad(
                inst.data, inst.center_sets(), trials=cfg.lab.trials,
                rng=np.random.default_rng([cfg.master_seed, 0xAB, k, n]),
            )
        coord = coordinate_rad(
            inst.data, trials=cfg.lab.trials,
            rng=np.random.default_rng([cfg.master_seed, 0xAC, k, n]),
        )
        kh = khintchine_check(
            n // k, trials=cfg.lab.trials,
            rng=np.random.default_rng([cfg.master_seed, 0xAD, k, n]),
        )

        lower = math.sqrt(k * n / 2.0)
        cbound = 3.0 * math.sqrt(n)
        checks = [
            ("finite_class", fc.value, fc.std_error, fc.trials, lower,
             fc.value >= lower - 3.0 * fc.std_error),
            ("coordinate", coord.value, coord.std_error, coord.trials, cbound,
             coord.value <= cbound + 3.0 * coord.std_error),
            ("khintchine", kh.lhs, 0.0, 0, kh.rhs, kh.lhs >= kh.rhs),
        ]
        for name, value, se, trials, bound, ok in checks:
            verdict = "satisfied" if ok else "violated"
            violated = violated or not ok
            row = (k, n, name, value, se, trials, bound, verdict)
            rows.append(row)
            print(f"{k},{n},{name},{fmt12(value)},{fmt12(se)},{trials},"
                  f"{fmt12(bound)},{verdict}")

    with open(out / "rad_check.csv", "w", encoding="utf-8") as fh:
        fh.write("k,n,estimator,value,std_error,trials,bound,verdict\n")
        for k, n, name, value, se, trials, bound, verdict in rows:
            fh.write(f"{k},{n},{name},{fmt12(value)},{fmt12(se)},{trials},"
                     f"{fmt12(bound)},{verdict}\n")
    return 1 if violated else 0


def cmd_risk_scan(cfg: ExperimentConfig) -> int:
    sweep = cfg.sweep
    methods = []
    for name in sweep.methods:
        if name not in _METHOD_ALIASES:
            raise ConfigError(f"unknown sweep method {name!r}")
        methods.append(_METHOD_ALIASES[name])
    if sweep.m_mode == "fixed":
        if sweep.m_fixed is None:
            raise ConfigError("[sweep] m_mode=fixed needs m_fixed")
        policy = MPolicy("fixed", m=sweep.m_fixed)
    else:
        policy = MPolicy(sweep.m_mode, c_scale=cfg.nystrom.c_scale, delta=cfg.nystrom.delta)

    bench_kwargs = {}
    if sweep.benchmark_seed is not None:
        bench_kwargs["seed"] = sweep.benchmark_seed
    if sweep.benchmark_spread is not None:
        bench_kwargs["spread"] = sweep.benchmark_spread

    report = RiskReport()
    for k in sweep.k_values:
        P = standard_benchmark(k, bandwidth=cfg.kernel.bandwidth, **bench_kwargs)
        for n in sweep.n_values:
            for method in methods:
                cell = run_cell(
                    P, n, k, method, policy, reps=sweep.reps,
                    master_seed=cfg.master_seed, workers=cfg.workers,
                )
                report.cells.append(cell)

    summary = []
    if len(sweep.n_values) >= 3:
        k0 = min(sweep.k_values)
        for method in methods:
            try:
                expo, half = scaling_fit(report, "n", method=method, k=k0)
                report.fitted_exponents[f"alpha_n[{method},k={k0}]"] = (expo, half)
                summary.append(
                    f"alpha_n[{method},k={k0}] = {fmt12(expo)} +- {fmt12(half)}"
                )
            except KKMLabError as exc:
                summary.append(f"alpha_n[{method},k={k0}]: not fitted ({exc})")
    if len(sweep.k_values) >= 3:
        n0 = max(sweep.n_values)
        for method in methods:
            try:
                expo, half = scaling_fit(report, "k", method=method, n=n0)
                report.fitted_exponents[f"alpha_k[{method},n={n0}]"] = (expo, half)
                summary.append(
                    f"alpha_k[{method},n={n0}] = {fmt12(expo)} +- {fmt12(half)}"
                )
            except KKMLabError as exc:
                summary.append(f"alpha_k[{method},n={n0}]: not fitted ({exc})")

    status = 0
    if "exact_erm_approx" in methods and "nystrom" in methods:
        paired = overlapping = 0
        by_key = {(c.n, c.k, c.method): c for c in report.cells}
        for k in sweep.k_values:
            for n in sweep.n_values:
                e = by_key.get((n, k, "exact_erm_approx"))
                v = by_key.get((n, k, "nystrom"))
                if e is None or v is None:
                    continue
                paired += 1
                gap = abs(e.mean_excess_risk - v.mean_excess_risk)
                overlapping += gap <= 2.0 * e.std_error + 2.0 * v.std_error
        frac = overlapping / paired if paired else 1.0
        verdict = "consistent" if frac >= 0.8 else "violated"
        summary.append(
            f"exact_vs_nystrom: {overlapping}/{paired} cells overlap "
            f"(2 std_error bands) -> {verdict}"
        )
        if verdict == "violated":
            status = 1

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "report.csv")
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    for line in summary:
        print(line)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kkmlab",
        description="Kernel k-means with Nystrom landmarks and its numerical lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="experiment config file (INI)")
        p.add_argument("--output-dir", default=None, help="override the output directory")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--workers", type=int, default=None, help="parallel reps")

    p = sub.add_parser("cluster", help="cluster a dataset and write assignment/trace CSVs")
    add_common(p)
    p.add_argument("--method", choices=["lloyd", "approx", "nystrom"], default=None)
    p.add_argument("--m", type=int, default=None, help="fixed landmark count")
    p.add_argument("--k", type=int, default=None, help="cluster count")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("nystrom-embed", help="write the landmark embedding to CSV")
    add_common(p)
    p.add_argument("--m", type=int, default=None)
    p.set_defaults(func=cmd_nystrom_embed)

    p = sub.add_parser("rad-check", help="verify the sign-complexity bound table")
    add_common(p)
    p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    p.set_defaults(func=cmd_rad_check)

    p = sub.add_parser("risk-scan", help="run the excess-risk sweep and write report.csv")
    add_common(p)
    p.add_argument("--methods", default=None, help="comma-separated method subset")
    p.add_argument("--reps", type=int, default=None)
    p.set_defaults(func=cmd_risk_scan)

    p = sub.add_parser("spectrum", help="print eigenvalues, effective dimension, landmark table")
    add_common(p)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_spectrum)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key, None)
        for key in ("method", "m", "k", "trials", "methods", "reps", "output_dir", "seed", "workers")
        if getattr(args, key, None) is not None
    }
    try:
        cfg = load_config(args.config, overrides=overrides)
        return args.func(cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KKMLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
