import math
from statistics import NormalDist

import numpy as np
import pytest
from scipy import special, stats

from patchlab.statlab.distributions import betainc, f_cdf, f_sf, t_cdf, t_ppf, t_sf_two_sided

GRID = [(a, b, x) for a in (0.5, 1, 2.5, 13, 80) for b in (0.5, 1, 3, 40) for x in (1e-6, 0.01, 0.3, 0.5, 0.77, 0.999)]


@pytest.mark.parametrize("a,b,x", GRID)
def test_betainc_against_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-10, abs=1e-13)


def test_betainc_endpoints():
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0


@pytest.mark.parametrize("df", [1, 2, 4.5, 26, 300, 1e5])
@pytest.mark.parametrize("x", [-40, -3.2, -0.7, 0.0, 0.01, 1.5, 3.211, 12])
def test_t_cdf_against_scipy(x, df):
    assert t_cdf(x, df) == pytest.approx(stats.t.cdf(x, df), rel=1e-9, abs=1e-12)


def test_t_two_sided_small_tail():
    assert t_sf_two_sided(3.211, 26) == pytest.approx(2 * stats.t.sf(3.211, 26), rel=1e-9)
    assert t_sf_two_sided(25.0, 26) == pytest.approx(2 * stats.t.sf(25.0, 26), rel=1e-8)


def test_t_cdf_symmetry_and_normal_limit():
    for df in (0.3, 1, 7, 1e4):
        assert t_cdf(0.0, df) == 0.5
        assert t_cdf(1.3, df) + t_cdf(-1.3, df) == pytest.approx(1.0, abs=1e-14)
    nd = NormalDist()
    for x in (-2.5, -1, 0.4, 1.96):
        assert abs(t_cdf(x, 1e6) - nd.cdf(x)) < 1e-4


def test_t_cdf_infinities_and_bad_df():
    assert t_cdf(math.inf, 3) == 1.0 and t_cdf(-math.inf, 3) == 0.0
    with pytest.raises(ValueError):
        t_cdf(1.0, 0)


@pytest.mark.parametrize("d1,d2", [(1, 1), (3, 26), (18, 17), (2, 500)])
@pytest.mark.parametrize("x", [0.05, 0.9, 2.0, 6.27, 106.1])
def test_f_against_scipy(x, d1, d2):
    assert f_cdf(x, d1, d2) == pytest.approx(stats.f.cdf(x, d1, d2), rel=1e-9, abs=1e-13)
    assert f_sf(x, d1, d2) == pytest.approx(stats.f.sf(x, d1, d2), rel=1e-8, abs=1e-300)


def test_f_boundaries():
    assert f_cdf(0, 2, 3) == 0.0 and f_sf(0, 2, 3) == 1.0
    assert f_sf(math.inf, 2, 3) == 0.0


@pytest.mark.parametrize("q", [0.001, 0.025, 0.3, 0.5, 0.975, 0.9999])
@pytest.mark.parametrize("df", [1, 5, 26])
def test_t_ppf_inverts(q, df):
    assert t_ppf(q, df) == pytest.approx(stats.t.ppf(q, df), rel=1e-9, abs=1e-12)


def test_t_ppf_domain():
    with pytest.raises(ValueError):
        t_ppf(1.0, 3)


def test_random_betainc_agreement():
    rng = np.random.default_rng(5)
    for a, b, x in zip(rng.uniform(0.1, 200, 300), rng.uniform(0.1, 200, 300), rng.uniform(0, 1, 300)):
        assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), rel=1e-9, abs=1e-12)
