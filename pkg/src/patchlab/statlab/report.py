"""Text and CSV renderings of fits: lm-style summaries, selection tables,
diagnostic series and prediction curves."""

from __future__ import annotations

import csv
from dataclasses import astuple
from typing import Sequence

import numpy as np

from .ols import Diagnostics, FittedModel, predict_with_interval
from .selection import SELECTION_COLUMNS, SelectionRow


def _signif(p: float) -> str:
    for cut, mark in ((0.001, "***"), (0.01, "**"), (0.05, "*"), (0.1, ".")):
        if p < cut:
            return mark
    return ""


def _pval(p: float) -> str:
    return "< 2e-16" if p < 2e-16 else f"{p:.4g}" if p >= 1e-4 else f"{p:.2e}"


def format_summary(model: FittedModel, call: str | None = None) -> str:
    """Coefficient table and fit statistics in the layout of R's ``summary.lm``."""
    lines = []
    if call or model.label:
        lines += ["Call:", f"lm(formula = {call or model.label})", ""]
    q = np.quantile(model.residuals, [0, 0.25, 0.5, 0.75, 1.0])
    heads = ["Min", "1Q", "Median", "3Q", "Max"]
    vals = [f"{v:.6f}" for v in q]
    w = max(len(s) for s in vals + heads)
    lines += ["Residuals:", " ".join(h.rjust(w) for h in heads), " ".join(v.rjust(w) for v in vals), ""]

    name_w = max(len(n) for n in model.names)
    rows = [("", "Estimate", "Std. Error", "t value", "Pr(>|t|)", "")]
    for n, b, se, t, p in zip(model.names, model.coef, model.se, model.tvalues, model.pvalues):
        rows.append((n, f"{b:.6f}", f"{se:.6f}", f"{t:.3f}", _pval(p), _signif(p)))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines.append("Coefficients:")
    for r in rows:
        cells = [r[0].ljust(name_w)] + [r[i].rjust(widths[i]) for i in range(1, 5)] + [r[5]]
        lines.append(" ".join(cells).rstrip())
    lines += [
        "---",
        "Signif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1",
        "",
        f"Residual standard error: {model.sigma:.4g} on {model.df_resid} degrees of freedom",
        f"Multiple R-squared:  {model.r2:.4g},\tAdjusted R-squared:  {model.adj_r2:.4g}",
        f"F-statistic: {model.fstat:.4g} on {model.df_model} and {model.df_resid} DF,  p-value: {_fstat_p(model.f_pvalue)}",
        f"Log-likelihood: {model.loglik:.4f} (df={model.n_params}),  AIC: {model.aic:.2f},  BIC: {model.bic:.2f}",
    ]
    return "\n".join(lines) + "\n"


def _fstat_p(p: float) -> str:
    return "< 2.2e-16" if p < 2.2e-16 else f"{p:.4g}"


def _csv_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_coefficients_csv(model: FittedModel, path) -> None:
    _csv_rows(path, ("term", "estimate", "std_error", "t_value", "p_value"),
              ([n] + [_num(v) for v in vals] for n, *vals in
               zip(model.names, model.coef, model.se, model.tvalues, model.pvalues)))


def write_selection_csv(rows: Sequence[SelectionRow], path) -> None:
    _csv_rows(path, SELECTION_COLUMNS, ([_num(v) for v in astuple(r)] for r in rows))


def format_selection(rows: Sequence[SelectionRow]) -> str:
    head = f"{'model':<24} {'df':>3} {'adj_r2':>7} {'cv_rmse':>8} {'sd':>7} {'aic':>8} {'bic':>8}"
    out = [head]
    for r in rows:
        out.append(f"{r.label:<24} {r.df:>3} {r.adj_r2:>7.3f} {r.cv_rmse:>8.4f} {r.sigma:>7.4f} {r.aic:>8.2f} {r.bic:>8.2f}")
    return "\n".join(out) + "\n"


def write_diagnostics_csv(diag: Diagnostics, path) -> None:
    _csv_rows(path, Diagnostics.COLUMNS, ([_num(v) for v in row] for row in diag.rows()))


CURVE_COLUMNS = ("group", "overlap", "threshold", "mean", "lower", "upper", "extrapolated")


def prediction_curves(model: FittedModel, overlaps: Sequence[float], thresholds: Sequence[float],
                      groups: dict[str, dict] | None = None, level: float = 0.95) -> list[tuple]:
    """Mean-response curves over ``thresholds`` for each overlap (and each fixed group of other fields)."""
    groups = groups or {"all": {}}
    out = []
    for gname, fixed in groups.items():
        for o in overlaps:
            recs = [dict(fixed, threshold=float(t), overlap=float(o)) for t in thresholds]
            pred = predict_with_interval(model, recs, level)
            for t, m, lo, hi, ex in zip(thresholds, pred.mean, pred.lower, pred.upper, pred.extrapolated):
                out.append((gname, float(o), float(t), float(m), float(lo), float(hi), bool(ex)))
    return out


def write_curves_csv(rows: Sequence[tuple], path) -> None:
    _csv_rows(path, CURVE_COLUMNS, ([_num(v) for v in r] for r in rows))
