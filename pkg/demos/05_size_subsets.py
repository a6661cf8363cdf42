"""
Per-size models and the missing rows
====================================

The per-size table has 45 rows, but a reported set of fits has residual
degrees of freedom that only add up for 36 rows. Dropping one threshold level
gives five 36-row candidates; each is fit with the additive, interaction,
polynomial and spline formulas and scored against the reported residual sums
of squares.
"""

from patchlab.statlab import get_equation, size_grid
from patchlab.statlab.reconcile import fit_subsets, leave_one_level_out, residual_df_consistent, score_subsets

formulas = [("additive", get_equation(10).formula), ("interaction", get_equation(11).formula),
            ("poly", get_equation(12).formula), ("spline", get_equation(13).formula)]

# Residual df and RSS reported for the four fits.
targets = {
    "additive": {"res_df": 30, "rss": 0.014912},
    "interaction": {"res_df": 23, "rss": 0.008039},
    "poly": {"res_df": 11, "rss": 0.001723},
    "spline": {"res_df": 17, "rss": 0.004430},
}

subsets = leave_one_level_out(size_grid(), "threshold")
fits = fit_subsets(subsets, formulas)
for f in fits:
    if f.error:
        print(f"{f.subset:<16} {f.label:<12} failed: {f.error}")
    else:
        extra = f"  F vs previous {f.f_vs_prev:.2f}" if f.f_vs_prev is not None else ""
        print(f"{f.subset:<16} {f.label:<12} n={f.n} df={f.res_df:<3} RSS={f.rss:.6f}{extra}")

print("\nresidual df consistent:", residual_df_consistent(fits, targets))
print("worst relative RSS gap per subset:")
for name, gap in score_subsets(fits, targets):
    print(f"  {name:<16} {gap:.1%}")
