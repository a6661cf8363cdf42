"""Model selection: k-fold cross-validated RMSE, backward term elimination,
and comparison tables across candidate formulas."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import FoldRankError, InsufficientData, InvalidArgument, RankError
from .design import Formula, Var, column, n_records, take, term_label
from .ols import fit_formula


@dataclass(frozen=True)
class CVResult:
    k: int
    rmse: float
    fold_rmse: tuple[float, ...]
    assignment: tuple[int, ...] = field(repr=False)
    seed: int | None = None


def fold_assignment(n: int, k: int, seed: int | None = None) -> np.ndarray:
    """Fold index per row: round-robin by row index, or a seeded shuffle of it."""
    if k < 2:
        raise InvalidArgument("k must be >= 2")
    if k > n:
        raise InvalidArgument(f"k={k} exceeds the {n} rows")
    base = np.arange(n) % k
    if seed is None:
        return base
    return np.random.default_rng(seed).permutation(base)


def kfold_cv_rmse(
    spec: Formula,
    records,
    k: int = 10,
    seed: int | None = None,
    assignment: Sequence[int] | None = None,
    jobs: int = 1,
) -> CVResult:
    """Held-out RMSE with every basis recipe refit on each training fold."""
    n = n_records(records)
    if assignment is None:
        folds = fold_assignment(n, k, seed)
    else:
        folds = np.asarray(assignment, dtype=int)
        if folds.size != n:
            raise InvalidArgument(f"assignment has {folds.size} entries for {n} rows")
        k = int(np.unique(folds).size)
        if k < 2:
            raise InvalidArgument("assignment must use at least two folds")
    labels = sorted(np.unique(folds).tolist())
    y = column(records, spec.response).astype(float)

    def one(fold):
        test = np.flatnonzero(folds == fold)
        train = np.flatnonzero(folds != fold)
        try:
            model = fit_formula(spec, take(records, train))
        except (RankError, InsufficientData) as e:
            raise FoldRankError(fold, e) from e
        pred = model.predict(take(records, test))
        return test, pred

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(one, labels))
    else:
        results = [one(f) for f in labels]
    sq = np.empty(n)
    per_fold = []
    for test, pred in results:
        err = (y[test] - pred) ** 2
        sq[test] = err
        per_fold.append(math.sqrt(float(err.mean())))
    return CVResult(k, math.sqrt(float(sq.mean())), tuple(per_fold), tuple(int(f) for f in folds), seed)


def repeated_cv_rmse(spec: Formula, records, k: int = 10, seeds: Sequence[int] = range(50), jobs: int = 1) -> np.ndarray:
    return np.array([kfold_cv_rmse(spec, records, k, seed=s, jobs=jobs).rmse for s in seeds])


# Recursive elimination


@dataclass(frozen=True)
class RFEStep:
    removed: str
    rmse: float
    remaining: tuple[str, ...]


@dataclass(frozen=True)
class RFEResult:
    baseline_rmse: float
    steps: tuple[RFEStep, ...]

    @property
    def removal_order(self) -> list[str]:
        return [s.removed for s in self.steps]

    def ranking(self) -> list[str]:
        """Terms from most to least important (the last survivors rank first)."""
        last = list(self.steps[-1].remaining) if self.steps else []
        return last + list(reversed(self.removal_order))


def removable_terms(terms: Sequence[tuple[Var, ...]]) -> list[tuple[Var, ...]]:
    """Terms not contained in any higher-order term still present (marginality)."""
    out = []
    for t in terms:
        if not any(len(u) > len(t) and set(t) <= set(u) for u in terms):
            out.append(t)
    return out


def rfe_prune(spec: Formula, records, k: int = 10, seed: int | None = None, min_terms: int = 1,
              jobs: int = 1) -> RFEResult:
    """Backward elimination: at each step drop the removable term whose absence gives the lowest CV RMSE.

    Ties go to the earliest term in formula order; all candidates share one fold assignment.
    """
    terms = list(spec.terms)
    if len(removable_terms(terms)) < 1 or len(terms) <= min_terms:
        raise InvalidArgument("nothing to prune")
    folds = fold_assignment(n_records(records), k, seed)
    base = kfold_cv_rmse(spec, records, assignment=folds).rmse
    steps = []
    while len(terms) > min_terms:
        cands = removable_terms(terms)

        def score(t):
            reduced = spec.with_terms([u for u in terms if u != t])
            try:
                return kfold_cv_rmse(reduced, records, assignment=folds).rmse
            except FoldRankError:
                return math.inf

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                scores = list(ex.map(score, cands))
        else:
            scores = [score(t) for t in cands]
        best = int(np.argmin(scores))
        drop = cands[best]
        terms = [u for u in terms if u != drop]
        steps.append(RFEStep(term_label(drop), float(scores[best]), tuple(term_label(u) for u in terms)))
    return RFEResult(base, tuple(steps))


# Comparison table


@dataclass(frozen=True)
class SelectionRow:
    label: str
    formula: str
    df: int
    adj_r2: float
    cv_rmse: float
    sigma: float
    aic: float
    bic: float
    rss: float
    res_df: int


SELECTION_COLUMNS = ("model", "formula", "df", "adj_r2", "cv_rmse", "residual_sd", "aic", "bic", "rss", "res_df")


def selection_row(label: str, spec: Formula, records, k: int = 10, seed: int | None = None) -> SelectionRow:
    m = fit_formula(spec, records)
    cv = kfold_cv_rmse(spec, records, k, seed=seed)
    return SelectionRow(label, str(spec), m.n_params, m.adj_r2, cv.rmse, m.sigma, m.aic, m.bic, m.rss, m.df_resid)
