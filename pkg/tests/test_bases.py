import numpy as np
import pytest

from oracles import natural_spline_truncated_basis
from patchlab.errors import InvalidArgument, RankError
from patchlab.statlab.bases import NaturalSpline, OrthoPoly, natural_spline_basis, orthogonal_poly_basis

GRID_T = np.repeat([0.1, 0.3, 0.5, 1.0], 9)


def test_poly_columns_orthonormal_and_centered():
    Z, _ = orthogonal_poly_basis(GRID_T, 3)
    assert Z.shape == (36, 3)
    np.testing.assert_allclose(Z.sum(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose(Z.T @ Z, np.eye(3), atol=1e-10)


def test_poly_degree_one_closed_form():
    x = np.array([2.0, 3.0, 7.0, 11.0, 4.0])
    Z, _ = orthogonal_poly_basis(x, 1)
    xc = x - x.mean()
    np.testing.assert_allclose(Z[:, 0], xc / np.linalg.norm(xc), atol=1e-12)


def test_poly_sign_convention_leading_positive():
    # each column's top-order coefficient is positive, so the largest x has
    # the same sign as the column's leading power
    x = np.linspace(0, 1, 12)
    Z, _ = orthogonal_poly_basis(x, 3)
    for k in range(3):
        coef = np.polyfit(x, Z[:, k], k + 1)
        assert coef[0] > 0


def test_poly_centering_invariance():
    rng = np.random.default_rng(0)
    x = rng.uniform(-2, 5, 30)
    a, _ = orthogonal_poly_basis(x, 3)
    b, _ = orthogonal_poly_basis(x + 123.4, 3)
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_poly_recipe_reproduces_training_columns():
    x = np.array([0.1, 0.2, 0.5, 0.7, 0.9, 1.4])
    Z, recipe = orthogonal_poly_basis(x, 3)
    np.testing.assert_allclose(recipe(x), Z, atol=1e-12)


def test_poly_recipe_extends_the_same_polynomials():
    x = np.linspace(0, 1, 9)
    Z, recipe = orthogonal_poly_basis(x, 3)
    new = np.array([-0.3, 0.05, 0.61, 1.7])
    for k in range(3):
        coef = np.polyfit(x, Z[:, k], 3)
        np.testing.assert_allclose(recipe(new)[:, k], np.polyval(coef, new), atol=1e-9)


def test_poly_needs_distinct_values():
    with pytest.raises(RankError):
        OrthoPoly.fit([1, 1, 2, 2, 3, 3], 3)
    with pytest.raises(InvalidArgument):
        OrthoPoly.fit([1, 2, 3], 0)


T5 = np.repeat([0.1, 0.2, 0.3, 0.4, 0.5], 9)


def test_ns_one_knot_two_columns():
    B, recipe = natural_spline_basis(T5, [0.15])
    assert B.shape == (45, 2) and recipe.ncols == 2
    assert recipe.boundary == (0.1, 0.5)


def test_ns_spans_truncated_power_basis():
    x = np.linspace(0, 10, 40)
    knots = [2.5, 6.0]
    B, _ = natural_spline_basis(x, knots)
    ref = natural_spline_truncated_basis(x, [0.0, *knots, 10.0])
    ones = np.ones((x.size, 1))
    for src, dst in ((B, ref), (ref, B)):
        A = np.hstack([ones, src])
        coef, *_ = np.linalg.lstsq(A, dst, rcond=None)
        np.testing.assert_allclose(A @ coef, dst, atol=1e-9)


def test_ns_zero_second_derivative_at_and_beyond_boundary():
    s = NaturalSpline.fit(np.linspace(1, 4, 20), [2.0, 3.0])
    np.testing.assert_allclose(s(np.array([1.0, 4.0]), nu=2), 0, atol=1e-9)
    np.testing.assert_array_equal(s(np.array([0.0, 5.0]), nu=2), 0)


def test_ns_linear_outside_boundary():
    s = NaturalSpline.fit(np.linspace(0, 1, 10), [0.4])
    left = s(np.array([-2.0, -1.0, 0.0]))
    right = s(np.array([1.0, 2.0, 3.0]))
    for v in (left, right):
        np.testing.assert_allclose(v[1] - v[0], v[2] - v[1], atol=1e-12)
    # and joins the inside smoothly
    np.testing.assert_allclose(s(np.array([1.0 + 1e-7])), s(np.array([1.0])), atol=1e-6)


def test_ns_c2_at_interior_knot():
    s = NaturalSpline.fit(np.linspace(0, 1, 10), [0.4])
    eps = 1e-7
    for nu in (0, 1, 2):
        np.testing.assert_allclose(s(np.array([0.4 - eps]), nu=nu), s(np.array([0.4 + eps]), nu=nu), atol=1e-5)


def test_ns_knot_outside_data():
    with pytest.raises(InvalidArgument):
        NaturalSpline.fit(np.linspace(0.15, 0.5, 10), [0.15])
    with pytest.raises(InvalidArgument):
        NaturalSpline.fit([0.0, 1.0], [2.0])


def test_ns_recipe_returns_training_basis():
    B, recipe = natural_spline_basis(T5, [0.15])
    np.testing.assert_allclose(recipe(T5), B, atol=1e-14)
