"""
Comparing candidate models
==========================

Seven formulas of increasing flexibility are fit to the detector grid and
compared on adjusted R^2, residual SD, AIC, BIC and 10-fold CV RMSE. The CV
number depends on how rows fall into folds, so it is shown for the fixed
round-robin split and as a spread over 50 shuffled splits.
"""

import numpy as np

from patchlab.statlab import get_equation, model_grid, repeated_cv_rmse, rfe_prune
from patchlab.statlab.equations import SELECTION_SET
from patchlab.statlab.report import format_selection
from patchlab.statlab.selection import selection_row

records = model_grid()
rows = [selection_row(get_equation(i).name, get_equation(i).formula, records) for i in SELECTION_SET]
print(format_selection(rows))

spec = get_equation(5).formula
spread = repeated_cv_rmse(spec, records, k=10, seeds=range(50))
print(f"\ninteraction-poly CV RMSE over 50 shuffles: median {np.median(spread):.4f}, "
      f"range {spread.min():.4f}-{spread.max():.4f}")

# Backward elimination on the same formula, respecting marginality: main
# effects stay while an interaction that contains them remains.
res = rfe_prune(get_equation(4).formula, records, k=10, seed=0)
print(f"\nbackward elimination from the full three-way model (baseline {res.baseline_rmse:.4f})")
for step in res.steps:
    print(f"  drop {step.removed:<28} -> CV RMSE {step.rmse:.4f}")
