"""Search over row subsets for the one that best explains a set of reported fit statistics.

Useful when a published model table was fit to an unstated subset of the
available rows: every candidate subset is fit with each formula and scored
against the reported values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import PatchlabError
from .design import Formula, column
from .ols import anova_nested, fit_formula


@dataclass(frozen=True)
class SubsetFit:
    subset: str
    label: str
    n: int
    res_df: int
    rss: float
    adj_r2: float
    aic: float
    bic: float
    f_vs_prev: float | None
    p_vs_prev: float | None
    error: str | None = None


def leave_one_level_out(records, field: str) -> dict[str, list]:
    """Subsets that each drop every row with one value of ``field``."""
    vals = column(records, field)
    levels = sorted(set(vals.tolist()))
    return {f"{field}!={lvl:g}" if isinstance(lvl, float) else f"{field}!={lvl}":
            [r for r, v in zip(records, vals) if v != lvl] for lvl in levels}


def fit_subsets(subsets: Mapping[str, Sequence], formulas: Sequence[tuple[str, Formula]]) -> list[SubsetFit]:
    """Fit each formula on each subset; consecutive formulas are compared by nested F test."""
    out = []
    for name, rows in subsets.items():
        prev = None
        for label, spec in formulas:
            try:
                m = fit_formula(spec, rows)
            except PatchlabError as e:
                out.append(SubsetFit(name, label, len(rows), 0, math.nan, math.nan, math.nan, math.nan, None, None,
                                     str(e)))
                prev = None
                continue
            f = p = None
            if prev is not None:
                try:
                    a = anova_nested(prev, m)
                    f, p = a.fstat, a.pvalue
                except PatchlabError:
                    pass
            out.append(SubsetFit(name, label, m.n, m.df_resid, m.rss, m.adj_r2, m.aic, m.bic, f, p))
            prev = m
    return out


def score_subsets(fits: Sequence[SubsetFit], targets: Mapping[str, Mapping[str, float]],
                  stat: str = "rss") -> list[tuple[str, float]]:
    """Subsets ranked by the largest relative deviation of ``stat`` from ``targets[label][stat]``."""
    worst: dict[str, float] = {}
    for f in fits:
        if f.label not in targets or stat not in targets[f.label]:
            continue
        want = targets[f.label][stat]
        got = getattr(f, stat)
        dev = abs(got - want) / abs(want) if np.isfinite(got) else math.inf
        worst[f.subset] = max(worst.get(f.subset, 0.0), dev)
    return sorted(worst.items(), key=lambda kv: kv[1])


def residual_df_consistent(fits: Sequence[SubsetFit], targets: Mapping[str, Mapping[str, float]]) -> dict[str, bool]:
    out: dict[str, bool] = {}
    for f in fits:
        want = targets.get(f.label, {}).get("res_df")
        if want is not None:
            out[f.subset] = out.get(f.subset, True) and f.res_df == want
    return out
