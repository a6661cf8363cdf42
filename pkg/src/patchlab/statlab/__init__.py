"""Regression tooling for hyperparameter studies."""

from .bases import NaturalSpline, OrthoPoly, natural_spline_basis, orthogonal_poly_basis
from .design import DesignMatrix, Formula, build_design, factor, formula, interaction, ns, num, poly
from .distributions import betainc, f_cdf, f_sf, t_cdf, t_ppf
from .equations import EQUATIONS, Equation, get_equation
from .experiments import ExperimentRecord, model_grid, read_experiments, size_grid, summarize_results
from .ols import FittedModel, anova_nested, diagnostics, fit_formula, ols_fit, predict_with_interval
from .selection import kfold_cv_rmse, repeated_cv_rmse, rfe_prune, selection_row

__all__ = [
    "EQUATIONS", "DesignMatrix", "Equation", "ExperimentRecord", "FittedModel", "Formula", "NaturalSpline",
    "OrthoPoly", "anova_nested", "betainc", "build_design", "diagnostics", "f_cdf", "f_sf", "factor",
    "fit_formula", "formula", "get_equation", "interaction", "kfold_cv_rmse", "model_grid",
    "natural_spline_basis", "ns", "num", "ols_fit", "orthogonal_poly_basis", "poly", "predict_with_interval",
    "read_experiments", "repeated_cv_rmse", "rfe_prune", "selection_row", "size_grid", "summarize_results",
    "t_cdf", "t_ppf",
]
