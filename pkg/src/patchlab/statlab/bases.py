"""Regression bases whose recipes can be replayed on new data.

``OrthoPoly`` follows the orthonormal-polynomial convention of R's ``poly()``;
``NaturalSpline`` follows ``splines::ns()`` with intercept dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from ..errors import InvalidArgument, RankError


@dataclass(frozen=True)
class OrthoPoly:
    """Recipe for a degree-``d`` orthonormal polynomial basis.

    ``alpha`` and ``norm2`` are the three-term recurrence coefficients fitted
    on the training values; evaluating at those values reproduces columns
    with zero sum, unit norm, and mutual orthogonality.
    """

    degree: int
    alpha: tuple[float, ...]
    norm2: tuple[float, ...]  # leading 1, then squared norms of the degree-0..d polynomials

    @classmethod
    def fit(cls, x, degree: int) -> "OrthoPoly":
        x = np.asarray(x, dtype=float)
        if degree < 1:
            raise InvalidArgument("polynomial degree must be >= 1")
        if degree >= np.unique(x).size:
            raise RankError(f"degree {degree} needs more than {np.unique(x).size} distinct values")
        xbar = x.mean()
        xc = x - xbar
        vander = np.vander(xc, degree + 1, increasing=True)
        q, r = np.linalg.qr(vander)
        z = q * np.diag(r)  # sign-invariant: Q column times its R diagonal
        norm2 = (z**2).sum(axis=0)
        alpha = ((xc[:, None] * z**2).sum(axis=0) / norm2 + xbar)[:degree]
        return cls(degree, tuple(float(a) for a in alpha), (1.0,) + tuple(float(v) for v in norm2))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.degree
        z = np.ones((x.size, d + 1))
        z[:, 1] = x - self.alpha[0]
        for i in range(1, d):
            z[:, i + 1] = (x - self.alpha[i]) * z[:, i] - (self.norm2[i + 1] / self.norm2[i]) * z[:, i - 1]
        z /= np.sqrt(np.asarray(self.norm2[1:]))
        return z[:, 1:]

    @property
    def ncols(self) -> int:
        return self.degree


def orthogonal_poly_basis(x, degree: int) -> tuple[np.ndarray, OrthoPoly]:
    recipe = OrthoPoly.fit(x, degree)
    return recipe(x), recipe


@dataclass(frozen=True)
class NaturalSpline:
    """Natural cubic spline basis with ``len(knots) + 1`` columns.

    Cubic B-splines on the boundary and interior knots are projected onto
    the subspace with zero second derivative at both boundary knots. Outside
    the boundary the basis continues linearly.
    """

    knots: tuple[float, ...]
    boundary: tuple[float, float]

    @classmethod
    def fit(cls, x, knots, boundary=None) -> "NaturalSpline":
        x = np.asarray(x, dtype=float)
        lo, hi = (float(x.min()), float(x.max())) if boundary is None else map(float, boundary)
        knots = tuple(sorted(float(k) for k in np.atleast_1d(knots)))
        if not lo < hi:
            raise InvalidArgument("boundary knots must satisfy lo < hi")
        bad = [k for k in knots if not lo < k < hi]
        if bad:
            raise InvalidArgument(f"interior knots {bad} are outside ({lo}, {hi})")
        return cls(knots, (lo, hi))

    @property
    def ncols(self) -> int:
        return len(self.knots) + 1

    def _bspline(self) -> BSpline:
        lo, hi = self.boundary
        t = np.r_[[lo] * 4, self.knots, [hi] * 4]
        nb = t.size - 4
        return BSpline(t, np.eye(nb), 3, extrapolate=True)

    def _projection(self, spl: BSpline) -> np.ndarray:
        const = spl(np.array(self.boundary), nu=2)[:, 1:]
        q, _ = np.linalg.qr(const.T, mode="complete")
        return q[:, 2:]

    def __call__(self, x, nu: int = 0) -> np.ndarray:
        """Basis values (``nu = 0``) or their ``nu``-th derivative at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        spl = self._bspline()
        proj = self._projection(spl)
        lo, hi = self.boundary
        inside = (x >= lo) & (x <= hi)
        out = np.empty((x.size, proj.shape[1]))
        if inside.any():
            out[inside] = spl(x[inside], nu=nu)[:, 1:] @ proj
        for edge, mask in ((lo, x < lo), (hi, x > hi)):
            if not mask.any():
                continue
            value = spl(np.array([edge]), nu=0)[:, 1:] @ proj
            slope = spl(np.array([edge]), nu=1)[:, 1:] @ proj
            if nu == 0:
                out[mask] = value + (x[mask, None] - edge) * slope
            elif nu == 1:
                out[mask] = slope
            else:
                out[mask] = 0.0
        return out


def natural_spline_basis(x, knots, boundary=None) -> tuple[np.ndarray, NaturalSpline]:
    recipe = NaturalSpline.fit(x, knots, boundary)
    return recipe(x), recipe
