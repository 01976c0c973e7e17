"""Walkthrough: excess-risk scaling on the finite-support benchmark.

Finite support keeps the population risk exactly computable, so each cell
reports a true excess (population risk of the fitted centers minus the
optimal risk).  A log-log fit over the sample-size grid estimates the decay
exponent; the full-resolution version of this sweep lives in the acceptance
suite.  Takes about a minute.
"""

from kkmlab import MPolicy, run_cell, scaling_fit, standard_benchmark

P = standard_benchmark(2)
print(f"benchmark: {P.n_atoms} atoms on the unit sphere, uniform weights")

policy = MPolicy(mode="general", c_scale=1.0, delta=0.1)
cells = []
print(f"\n{'n':>5} {'method':>16} {'excess':>10} {'std_err':>9} {'m':>6}")
for n in (64, 128, 256):
    for method in ("exact_erm_approx", "nystrom"):
        cell = run_cell(P, n, 2, method, policy, reps=20, master_seed=4)
        cells.append(cell)
        print(f"{n:>5} {method:>16} {cell.mean_excess_risk:>10.5f} "
              f"{cell.std_error:>9.5f} {cell.m_used:>6.0f}")

expo, half = scaling_fit(cells, "n", method="exact_erm_approx")
print(f"\nfitted excess-risk exponent in n (exact method): {expo:.3f} +- {half:.3f}")
expo_n, half_n = scaling_fit(cells, "n", method="nystrom")
print(f"fitted excess-risk exponent in n (landmarks):     {expo_n:.3f} +- {half_n:.3f}")
