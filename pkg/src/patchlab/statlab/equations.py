"""Numbered catalogue of the candidate regression models.

Models 1-9 are fit on the detector grid (:func:`experiments.model_grid`),
models 10-13 on the per-size YOLOv11n grid (:func:`experiments.size_grid`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import InvalidArgument
from . import experiments
from .design import Formula, factor, formula, ns, num, poly

SPLINE_KNOT = 0.15


@dataclass(frozen=True)
class Equation:
    id: int
    name: str
    formula: Formula
    dataset: str  # "model_grid" or "size_grid"
    short: str

    def records(self):
        return _DATASETS[self.dataset]()


_DATASETS: dict[str, Callable] = {"model_grid": experiments.model_grid, "size_grid": experiments.size_grid}


def _grid_terms():
    M = factor("model")
    T = num("threshold", "Threshold")
    O = num("overlap", "Overlap")
    P = poly("threshold", 3, "Threshold")
    N = ns("threshold", [SPLINE_KNOT], "Threshold")
    return M, T, O, P, N


def _size_terms():
    S = factor("size")
    T = num("threshold")
    O = num("overlap")
    P = poly("threshold", 3)
    N = ns("threshold", [SPLINE_KNOT])
    I = num("images_train", "count_images_train")
    return S, T, O, P, N, I


def _build() -> dict[int, Equation]:
    M, T, O, P, N = _grid_terms()
    S, t, o, p, n, I = _size_terms()
    rows = [
        (1, "model_additive", formula("map50", M + T + O), "model_grid", "M + T + O"),
        (2, "model_additive_poly", formula("map50", M + P + O), "model_grid", "M + poly(T, 3) + O"),
        (3, "model_interaction", formula("map50", M + T * O), "model_grid", "M + T x O"),
        (4, "model_interaction_full", formula("map50", M * T * O), "model_grid", "M x T x O"),
        (5, "model_interaction_poly", formula("map50", M + P * O), "model_grid", "M + poly(T, 3) x O"),
        (6, "model_spline", formula("map50", M + N * O), "model_grid", "M + ns(T, knot = 0.15) x O"),
        (7, "model_spline_full", formula("map50", M * N * O), "model_grid", "M x ns(T, knot = 0.15) x O"),
        (8, "additive_5095", formula("map5095", M + P + O), "model_grid", "M + poly(T, 3) + O"),
        (9, "interaction_5095", formula("map5095", M + P * O), "model_grid", "M + poly(T, 3) x O"),
        (10, "size_additive", formula("map50", S + t + o + I), "size_grid", "size + T + O + Images"),
        (11, "size_interaction", formula("map50", S * t * o + I), "size_grid", "size x T x O + Images"),
        (12, "size_interaction_poly", formula("map50", S * p * o + I), "size_grid", "size x poly(T, 3) x O + Images"),
        (13, "size_spline", formula("map50", S * n * o + I), "size_grid", "size x ns(T, knot = 0.15) x O + Images"),
    ]
    return {r[0]: Equation(*r) for r in rows}


EQUATIONS = _build()
SELECTION_SET = (1, 2, 3, 4, 5, 6, 7)
SIZE_SET = (10, 11, 12, 13)


def get_equation(eq: int | str) -> Equation:
    try:
        key = int(eq)
    except (TypeError, ValueError):
        by_name = {e.name: e for e in EQUATIONS.values()}
        if eq in by_name:
            return by_name[eq]
        raise InvalidArgument(f"unknown equation {eq!r}") from None
    if key not in EQUATIONS:
        raise InvalidArgument(f"unknown equation {eq!r}; choose 1-{max(EQUATIONS)}")
    return EQUATIONS[key]
