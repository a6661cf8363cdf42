"""
How threshold and overlap drive mAP
===================================

The bundled detector grid holds 36 runs (3 detectors x 4 thresholds x 3
overlaps). The cubic orthogonal polynomial in threshold, interacted with
overlap, fits it closely; diagnostics and a prediction sweep follow.
"""

import numpy as np

from patchlab.statlab import diagnostics, fit_formula, get_equation, model_grid, predict_with_interval
from patchlab.statlab.report import format_summary

records = model_grid()
spec = get_equation(5).formula
model = fit_formula(spec, records)
print(format_summary(model))

d = diagnostics(model)
worst = int(np.argmax(d.cooks))
r = records[worst]
print(f"\nlargest Cook's distance {d.cooks[worst]:.3f} at {r.model} T={r.threshold} O={r.overlap}")
print(f"leverage sums to {d.leverage.sum():.6f} (= number of coefficients, {model.p})")

# Mean-response curve for one detector at the three overlaps.
thresholds = np.linspace(0.1, 1.0, 10)
print("\nYOLOv11n predicted mAP@0.5 (95% CI)")
for overlap in (0.0, 0.1, 0.3):
    pts = [{"model": "YOLOv11n", "threshold": t, "overlap": overlap} for t in thresholds]
    pred = predict_with_interval(model, pts)
    best = int(np.argmax(pred.mean))
    print(f"  O={overlap}: peak {pred.mean[best]:.3f} [{pred.lower[best]:.3f}, {pred.upper[best]:.3f}]"
          f" at T={thresholds[best]:.1f}")
