"""Student-t and F distribution functions via the regularized incomplete beta."""

from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 20000


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _stirling_corr(z: float) -> float:
    """lgamma(z) minus its Stirling approximation, for z >= 10."""
    z2 = z * z
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z


_LARGE = 10.0


def _log_front(a: float, b: float, x: float, y: float) -> float:
    """log(x**a * y**b / B(a, b)) with ``y = 1 - x``, avoiding large lgamma cancellation."""
    if a >= _LARGE and b >= _LARGE:
        s = a + b
        x0 = a / s
        return (
            a * math.log1p((x - x0) / x0)
            + b * math.log1p((y - (1.0 - x0)) / (1.0 - x0))
            + 0.5 * math.log(a * b / (s * 2.0 * math.pi))
            - (_stirling_corr(a) + _stirling_corr(b) - _stirling_corr(s))
        )
    if b >= _LARGE:
        # lgamma(b) - lgamma(a + b) expanded for large b
        return (
            a * math.log(x * b)
            + b * (math.log1p(-x) if x < 0.5 else math.log(y))
            - math.lgamma(a)
            + (a + b - 0.5) * math.log1p(a / b)
            - a
            - _stirling_corr(b)
            + _stirling_corr(a + b)
        )
    if a >= _LARGE:
        return _log_front(b, a, y, x)
    return math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)


def betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta function I_x(a, b).

    ``y`` may carry an exactly computed ``1 - x`` when ``x`` is close to 0 or 1.
    """
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a > 0 and b > 0")
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    front = math.exp(_log_front(a, b, x, y))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def t_cdf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("df must be positive")
    if x == 0:
        return 0.5
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    # Pick the argument that keeps the small tail accurate.
    return 1.0 - 0.5 * t_sf_two_sided(x, df) if x > 0 else 0.5 * t_sf_two_sided(x, df)


def t_sf_two_sided(x: float, df: float) -> float:
    """P(|T| >= |x|)."""
    x = abs(x)
    if x == 0:
        return 1.0
    x2 = x * x
    u, v = x2 / (df + x2), df / (df + x2)
    if x2 < df:
        return 1.0 - betainc(0.5, df / 2.0, u, v)
    return betainc(df / 2.0, 0.5, v, u)


def f_cdf(x: float, df1: float, df2: float) -> float:
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    s = df1 * x + df2
    return betainc(df1 / 2.0, df2 / 2.0, df1 * x / s, df2 / s)


def f_sf(x: float, df1: float, df2: float) -> float:
    """Upper tail P(F >= x), computed without cancellation."""
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    s = df1 * x + df2
    return betainc(df2 / 2.0, df1 / 2.0, df2 / s, df1 * x / s)


def t_ppf(q: float, df: float) -> float:
    """Quantile of the t distribution by bracketing and bisection on :func:`t_cdf`."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_ppf(1.0 - q, df)
    hi = 1.0
    while t_cdf(hi, df) < q:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
