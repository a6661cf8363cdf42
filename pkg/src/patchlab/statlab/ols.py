"""Ordinary least squares with classical inference, nested F tests,
influence diagnostics and mean-response intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from ..errors import InsufficientData, InvalidArgument, InvalidComparison, RankError
from .design import Design, DesignMatrix, Formula, build_design, collinear_columns
from .distributions import f_sf, t_ppf, t_sf_two_sided


@dataclass
class FittedModel:
    names: list[str]
    coef: np.ndarray
    se: np.ndarray
    tvalues: np.ndarray
    pvalues: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    y: np.ndarray
    X: np.ndarray = field(repr=False)
    xtx_inv: np.ndarray = field(repr=False)
    rss: float
    r2: float
    adj_r2: float
    sigma: float
    df_resid: int
    loglik: float
    aic: float
    bic: float
    fstat: float
    f_pvalue: float
    has_intercept: bool = True
    design: Design | None = field(default=None, repr=False)
    label: str | None = None

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def p(self) -> int:
        return int(self.coef.size)

    @property
    def df_model(self) -> int:
        return self.p - 1 if self.has_intercept else self.p

    @property
    def n_params(self) -> int:
        """Parameter count used by AIC/BIC: coefficients plus the error variance."""
        return self.p + 1

    def coefficient(self, name: str) -> float:
        return float(self.coef[self.names.index(name)])

    def model_matrix(self, records) -> np.ndarray:
        if self.design is None:
            return np.asarray(records, dtype=float)
        return self.design.matrix(records)

    def predict(self, records) -> np.ndarray:
        return self.model_matrix(records) @ self.coef


def _has_intercept(X: np.ndarray) -> bool:
    return bool(np.any(np.all(X == 1.0, axis=0)))


def ols_fit(X, y=None, names: Sequence[str] | None = None, label: str | None = None) -> FittedModel:
    """Least-squares fit through a QR decomposition.

    ``X`` is a :class:`DesignMatrix` or a plain ``n x p`` array; ``y`` the response.
    """
    design = None
    if isinstance(X, DesignMatrix):
        design, names, X = X.design, list(X.columns), X.values
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(p)]
    if y.size != n:
        raise InvalidArgument(f"response has {y.size} values for {n} rows")
    if n <= p:
        raise InsufficientData(f"{n} observations cannot support {p} coefficients")
    bad = collinear_columns(X, names)
    if bad:
        raise RankError("design matrix is rank deficient; collinear columns", bad)

    q, r = np.linalg.qr(X)
    coef = np.linalg.solve(r, q.T @ y)
    fitted = X @ coef
    resid = y - fitted
    rss = float(resid @ resid)
    df = n - p
    sigma2 = rss / df
    rinv = np.linalg.solve(r, np.eye(p))
    xtx_inv = rinv @ rinv.T
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = coef / se
    pvals = np.array([t_sf_two_sided(float(t), df) if np.isfinite(t) else 0.0 for t in tvals])

    intercept = _has_intercept(X)
    tss = float(((y - y.mean()) ** 2).sum()) if intercept else float(y @ y)
    df_model = p - 1 if intercept else p
    df_int = 1 if intercept else 0
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    adj = 1.0 - (1.0 - r2) * (n - df_int) / df
    if df_model > 0 and rss > 0:
        fstat = ((tss - rss) / df_model) / sigma2
        fp = f_sf(fstat, df_model, df)
    else:
        fstat, fp = (math.inf, 0.0) if df_model > 0 else (math.nan, math.nan)
    if rss > 0:
        loglik = -0.5 * n * (math.log(2.0 * math.pi * rss / n) + 1.0)
    else:
        loglik = math.inf
    k = p + 1
    return FittedModel(
        names=names, coef=coef, se=se, tvalues=tvals, pvalues=pvals, fitted=fitted, residuals=resid, y=y, X=X,
        xtx_inv=xtx_inv, rss=rss, r2=r2, adj_r2=adj, sigma=math.sqrt(sigma2), df_resid=df, loglik=loglik,
        aic=-2.0 * loglik + 2.0 * k, bic=-2.0 * loglik + math.log(n) * k, fstat=fstat, f_pvalue=fp,
        has_intercept=intercept, design=design, label=label,
    )


def fit_formula(spec: Formula, records, label: str | None = None) -> FittedModel:
    dm = build_design(spec, records)
    return ols_fit(dm, dm.design.response(records), label=label or str(spec))


# Nested comparison


@dataclass(frozen=True)
class AnovaResult:
    fstat: float
    pvalue: float
    df_num: int
    df_den: int
    rss_small: float
    rss_large: float


def anova_nested(small: FittedModel, large: FittedModel, tol: float = 1e-8) -> AnovaResult:
    """F test of ``small`` against the larger model containing it."""
    if small.n != large.n or not np.allclose(small.y, large.y, rtol=0, atol=1e-12):
        raise InvalidComparison("models were fit to different responses")
    dp = large.p - small.p
    if dp <= 0:
        raise InvalidComparison(f"large model must have more coefficients ({large.p} vs {small.p})")
    coef, *_ = np.linalg.lstsq(large.X, small.X, rcond=None)
    resid = small.X - large.X @ coef
    scale = np.linalg.norm(small.X, axis=0)
    if np.any(np.linalg.norm(resid, axis=0) > tol * np.maximum(scale, 1.0)):
        raise InvalidComparison("models are not nested: small column space is not inside the large one")
    den = large.rss / large.df_resid
    if den <= 0:
        raise InvalidComparison("large model fits exactly; F is undefined")
    f = ((small.rss - large.rss) / dp) / den
    return AnovaResult(f, f_sf(max(f, 0.0), dp, large.df_resid), dp, large.df_resid, small.rss, large.rss)


# Diagnostics


@dataclass
class Diagnostics:
    fitted: np.ndarray
    residuals: np.ndarray
    standardized: np.ndarray
    theoretical_q: np.ndarray
    sample_q: np.ndarray
    leverage: np.ndarray
    cooks: np.ndarray

    COLUMNS = ("index", "fitted", "residual", "std_residual", "leverage", "cooks_distance", "qq_theoretical", "qq_sample")

    def rows(self):
        order = np.argsort(np.argsort(self.standardized, kind="stable"), kind="stable")
        for i in range(self.fitted.size):
            yield (i + 1, self.fitted[i], self.residuals[i], self.standardized[i], self.leverage[i], self.cooks[i],
                   self.theoretical_q[order[i]], self.sample_q[order[i]])


def ppoints(n: int) -> np.ndarray:
    a = 3.0 / 8.0 if n <= 10 else 0.5
    return (np.arange(1, n + 1) - a) / (n + 1 - 2 * a)


def diagnostics(model: FittedModel) -> Diagnostics:
    """Series behind residual/fitted, normal Q-Q, scale-location and leverage plots."""
    h = np.einsum("ij,jk,ik->i", model.X, model.xtx_inv, model.X)
    s2 = model.sigma**2
    with np.errstate(divide="ignore", invalid="ignore"):
        std = model.residuals / np.sqrt(s2 * (1.0 - h))
        cooks = std**2 * h / (model.p * (1.0 - h))
    nd = NormalDist()
    theo = np.array([nd.inv_cdf(float(q)) for q in ppoints(model.n)])
    return Diagnostics(model.fitted.copy(), model.residuals.copy(), std, theo, np.sort(std), h, cooks)


# Prediction


@dataclass
class Prediction:
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    se: np.ndarray
    extrapolated: np.ndarray
    level: float


def predict_with_interval(model: FittedModel, records, level: float = 0.95) -> Prediction:
    """Mean response with a ``level`` confidence interval from ``t * SE(x0' b)``.

    Points outside the range of any numeric input seen at fit time are flagged
    in ``extrapolated`` (they are still predicted).
    """
    if not 0.0 < level < 1.0:
        raise InvalidArgument("level must be in (0, 1)")
    X0 = model.model_matrix(records)
    mean = X0 @ model.coef
    se = model.sigma * np.sqrt(np.einsum("ij,jk,ik->i", X0, model.xtx_inv, X0))
    t = t_ppf(0.5 + level / 2.0, model.df_resid)
    return Prediction(mean, mean - t * se, mean + t * se, se, _extrapolation_flags(model, records, X0), level)


def _extrapolation_flags(model: FittedModel, records, X0) -> np.ndarray:
    lo = model.X.min(axis=0) - 1e-12
    hi = model.X.max(axis=0) + 1e-12
    return np.any((X0 < lo) | (X0 > hi), axis=1)
