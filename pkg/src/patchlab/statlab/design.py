"""Model formulas and design matrices.

Formulas are built from term constructors combined with ``+`` and ``*``,
where ``a * b`` expands to ``a + b + a:b`` as in R::

    formula("map50", factor("model") + poly("threshold", 3, label="Threshold") * num("overlap", label="Overlap"))

Factors use treatment coding against their first level (case-insensitive
alphabetical order unless levels are given). Columns come out intercept
first, then terms ordered by interaction order, as ``lm`` lists them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import InvalidArgument, RankError, SchemaError
from .bases import NaturalSpline, OrthoPoly


@dataclass(frozen=True)
class Var:
    """One model component: a factor, a raw numeric, or a basis expansion of a numeric."""

    name: str
    kind: str  # factor | numeric | poly | ns
    label: str | None = None
    degree: int | None = None
    knots: tuple[float, ...] | None = None
    levels: tuple[str, ...] | None = None

    @property
    def display(self) -> str:
        return self.label or self.name

    def __str__(self) -> str:
        if self.kind == "poly":
            return f"poly({self.display}, {self.degree})"
        if self.kind == "ns":
            return f"ns({self.display}, knots = c({', '.join(_fmt_num(k) for k in self.knots)}))"
        return self.display


def _fmt_num(v: float) -> str:
    return f"{v:g}"


class Expr:
    """Ordered collection of terms; each term is a tuple of :class:`Var`."""

    def __init__(self, terms, text: str | None = None):
        seen = []
        for t in terms:
            if t not in seen:
                seen.append(t)
        self.terms: list[tuple[Var, ...]] = seen
        self.text = text or " + ".join(term_label(t) for t in seen)

    def __add__(self, other: "Expr") -> "Expr":
        return Expr(self.terms + other.terms, f"{self.text} + {other.text}")

    def __mul__(self, other: "Expr") -> "Expr":
        full = self.terms + other.terms + interaction(self, other).terms
        return Expr(full, f"{_wrap(self.text)} * {_wrap(other.text)}")

    def __repr__(self) -> str:
        return self.text


def _wrap(text: str) -> str:
    return f"({text})" if " + " in text else text


def interaction(a: Expr, b: Expr) -> Expr:
    """``a:b``: every pairwise union of a term of ``a`` with a term of ``b``."""
    out = []
    for ta in a.terms:
        for tb in b.terms:
            merged = list(ta)
            merged.extend(v for v in tb if v not in merged)
            out.append(tuple(merged))
    return Expr(out)


def term_label(term: Sequence[Var]) -> str:
    return ":".join(str(v) for v in term)


def factor(name: str, label: str | None = None, levels: Sequence[str] | None = None) -> Expr:
    return Expr([(Var(name, "factor", label, levels=tuple(levels) if levels else None),)])


def num(name: str, label: str | None = None) -> Expr:
    return Expr([(Var(name, "numeric", label),)])


def poly(name: str, degree: int, label: str | None = None) -> Expr:
    return Expr([(Var(name, "poly", label, degree=int(degree)),)])


def ns(name: str, knots: Sequence[float], label: str | None = None) -> Expr:
    return Expr([(Var(name, "ns", label, knots=tuple(float(k) for k in np.atleast_1d(knots))),)])


@dataclass(frozen=True)
class Formula:
    response: str
    rhs: Expr = field(compare=False)

    @property
    def terms(self) -> list[tuple[Var, ...]]:
        # stable sort by interaction order, as lm() does
        return sorted(self.rhs.terms, key=len)

    def __str__(self) -> str:
        return f"{self.response} ~ {self.rhs!r}"

    def without(self, term: tuple[Var, ...]) -> "Formula":
        return Formula(self.response, Expr([t for t in self.rhs.terms if t != term]))

    def expanded(self) -> str:
        return f"{self.response} ~ " + " + ".join(term_label(t) for t in self.terms)

    def with_terms(self, terms) -> "Formula":
        return Formula(self.response, Expr(list(terms)))


def formula(response: str, rhs: Expr) -> Formula:
    return Formula(response, rhs)


# Record access


def column(records: Any, name: str) -> np.ndarray:
    """Values of field ``name`` from a column mapping, a list of mappings, or a list of objects."""
    if isinstance(records, Mapping):
        if name not in records:
            raise SchemaError(f"missing column {name!r}")
        return np.asarray(records[name])
    vals = []
    for i, r in enumerate(records):
        if isinstance(r, Mapping):
            if name not in r:
                raise SchemaError(f"missing column {name!r}", f"row {i}")
            vals.append(r[name])
        else:
            if not hasattr(r, name):
                raise SchemaError(f"missing column {name!r}", f"row {i}")
            vals.append(getattr(r, name))
    return np.asarray(vals)


def n_records(records: Any) -> int:
    if isinstance(records, Mapping):
        return len(next(iter(records.values()))) if records else 0
    return len(records)


def take(records: Any, idx) -> Any:
    idx = np.asarray(idx)
    if isinstance(records, Mapping):
        return {k: np.asarray(v)[idx] for k, v in records.items()}
    return [records[i] for i in idx]


def sort_levels(values) -> tuple[str, ...]:
    return tuple(sorted({str(v) for v in values}, key=lambda s: (s.casefold(), s)))


# Encoders


class _Encoder:
    names: list[str]

    def __call__(self, records) -> np.ndarray:
        raise NotImplementedError


class _FactorEncoder(_Encoder):
    def __init__(self, var: Var, records):
        self.var = var
        self.levels = var.levels or sort_levels(column(records, var.name))
        if len(self.levels) < 2:
            raise RankError(f"factor {var.name!r} has a single level", [var.name])
        self.names = [f"{var.display}{lvl}" for lvl in self.levels[1:]]

    def __call__(self, records):
        vals = np.asarray([str(v) for v in column(records, self.var.name)])
        unknown = sorted(set(vals) - set(self.levels))
        if unknown:
            raise InvalidArgument(f"factor {self.var.name!r} has unseen levels {unknown}")
        return np.column_stack([(vals == lvl).astype(float) for lvl in self.levels[1:]])


class _NumericEncoder(_Encoder):
    def __init__(self, var: Var, records):
        self.var = var
        self.names = [var.display]

    def __call__(self, records):
        return column(records, self.var.name).astype(float)[:, None]


class _PolyEncoder(_Encoder):
    def __init__(self, var: Var, records):
        self.var = var
        self.recipe = OrthoPoly.fit(column(records, var.name).astype(float), var.degree)
        self.names = [f"{var}{k}" for k in range(1, var.degree + 1)]

    def __call__(self, records):
        return self.recipe(column(records, self.var.name).astype(float))


class _SplineEncoder(_Encoder):
    def __init__(self, var: Var, records):
        self.var = var
        self.recipe = NaturalSpline.fit(column(records, var.name).astype(float), var.knots)
        self.names = [f"{var}{k}" for k in range(1, self.recipe.ncols + 1)]

    def __call__(self, records):
        return self.recipe(column(records, self.var.name).astype(float))


_ENCODERS = {"factor": _FactorEncoder, "numeric": _NumericEncoder, "poly": _PolyEncoder, "ns": _SplineEncoder}


class Design:
    """Fitted recipe mapping records to a design matrix.

    Basis recipes (polynomial recurrences, spline knots, factor levels) are
    frozen at fit time so new records are encoded consistently.
    """

    def __init__(self, formula: Formula, records):
        self.formula = formula
        self.terms = formula.terms
        variables = []
        for t in self.terms:
            variables.extend(v for v in t if v not in variables)
        self.encoders = {v: _ENCODERS[v.kind](v, records) for v in variables}
        self.columns = ["(Intercept)"]
        self.term_slices: dict[tuple[Var, ...], slice] = {}
        for t in self.terms:
            start = len(self.columns)
            self.columns.extend(self._term_names(t))
            self.term_slices[t] = slice(start, len(self.columns))

    def _term_names(self, term) -> list[str]:
        # first component varies fastest
        parts = [self.encoders[v].names for v in term]
        return [":".join(reversed(combo)) for combo in itertools.product(*reversed(parts))]

    def _term_columns(self, term, blocks) -> np.ndarray:
        mats = [blocks[v] for v in term]
        cols = []
        for combo in itertools.product(*[range(m.shape[1]) for m in reversed(mats)]):
            c = np.ones(mats[0].shape[0])
            for m, k in zip(reversed(mats), combo):
                c = c * m[:, k]
            cols.append(c)
        return np.column_stack(cols)

    def matrix(self, records) -> np.ndarray:
        n = n_records(records)
        blocks = {v: enc(records) for v, enc in self.encoders.items()}
        parts = [np.ones((n, 1))] + [self._term_columns(t, blocks) for t in self.terms]
        return np.hstack(parts)

    def response(self, records) -> np.ndarray:
        return column(records, self.formula.response).astype(float)


@dataclass
class DesignMatrix:
    columns: list[str]
    values: np.ndarray
    design: Design

    @property
    def shape(self):
        return self.values.shape


def collinear_columns(X: np.ndarray, names: Sequence[str], tol: float = 1e-7) -> list[str]:
    """Columns that are (numerically) linear combinations of earlier columns."""
    kept: list[int] = []
    bad = []
    for j in range(X.shape[1]):
        col = X[:, j]
        norm = np.linalg.norm(col)
        if norm == 0:
            bad.append(names[j])
            continue
        if kept:
            basis = X[:, kept]
            coef, *_ = np.linalg.lstsq(basis, col, rcond=None)
            if np.linalg.norm(col - basis @ coef) <= tol * norm:
                bad.append(names[j])
                continue
        kept.append(j)
    return bad


def build_design(spec: Formula, records) -> DesignMatrix:
    if n_records(records) == 0:
        raise InvalidArgument("no records")
    design = Design(spec, records)
    X = design.matrix(records)
    bad = collinear_columns(X, design.columns)
    if bad:
        raise RankError("design matrix is rank deficient; collinear columns", bad)
    return DesignMatrix(list(design.columns), X, design)
