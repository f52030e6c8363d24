"""Scalar special functions: log-gamma, regularized incomplete gamma and beta
integrals, and the Gamma / Fisher quantiles obtained by inverting them.

Only the handful of functions needed by the score families and the samplers is
provided; this is deliberately not a general distribution toolkit.  All
routines are pure scalar float64 functions and are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericError

_REL_EPS = 1e-16          # series / continued-fraction termination
_TINY = 1e-300            # Lentz underflow guard
_MAX_TERMS = 500
_MAX_NEWTON = 200         # quantile iteration cap
_RESIDUAL = 1e-12         # |cdf(x) - u| convergence target

__all__ = [
    "QuantileResult",
    "ln_gamma",
    "gamma_cdf",
    "gamma_quantile",
    "beta_cdf",
    "fisher_cdf",
    "fisher_quantile",
]


@dataclass(frozen=True)
class QuantileResult:
    """Solution of cdf(value) = u with the iteration count and final residual."""

    value: float
    iterations: int
    residual: float


def _check_scalar(name, x):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def ln_gamma(x):
    """Natural log of the gamma function for x > 0."""
    x = _check_scalar("x", x)
    if x <= 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _gamma_p_series(a, x):
    # Lower regularized gamma by power series; reliable for x < a + 1.
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_TERMS):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _REL_EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericError(f"incomplete gamma series stalled at a={a}, x={x}")


def _gamma_q_contfrac(a, x):
    # Upper regularized gamma by modified Lentz continued fraction; x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _REL_EPS:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericError(f"incomplete gamma continued fraction stalled at a={a}, x={x}")


def gamma_cdf(a, x):
    """Regularized lower incomplete gamma P(a, x), the Gamma(a, 1) cdf."""
    a = _check_scalar("a", a)
    x = _check_scalar("x", x)
    if a <= 0.0:
        raise DomainError(f"gamma_cdf requires a > 0, got {a}")
    if x < 0.0:
        raise DomainError(f"gamma_cdf requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(_gamma_p_series(a, x), 1.0)
    return max(1.0 - _gamma_q_contfrac(a, x), 0.0)


def _gamma_pdf(a, x):
    if x <= 0.0:
        return 0.0
    return math.exp((a - 1.0) * math.log(x) - x - math.lgamma(a))


def _beta_contfrac(a, b, x):
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_TERMS + 1):
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
        if abs(delta - 1.0) < _REL_EPS:
            return h
    raise NumericError(f"incomplete beta continued fraction stalled at a={a}, b={b}, x={x}")


def beta_cdf(a, b, x):
    """Regularized incomplete beta I_x(a, b) for x in [0, 1]."""
    a = _check_scalar("a", a)
    b = _check_scalar("b", b)
    x = _check_scalar("x", x)
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"beta_cdf requires a, b > 0, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise DomainError(f"beta_cdf requires 0 <= x <= 1, got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) on the slow side.
    if x < (a + 1.0) / (a + b + 2.0):
        return min(front * _beta_contfrac(a, b, x) / a, 1.0)
    return max(1.0 - front * _beta_contfrac(b, a, 1.0 - x) / b, 0.0)


def fisher_cdf(d1, d2, x):
    """Fisher (F-distribution) cdf with d1 and d2 degrees of freedom."""
    if x <= 0.0:
        return 0.0
    y = d1 * x / (d1 * x + d2)
    return beta_cdf(0.5 * d1, 0.5 * d2, y)


def _norm_quantile(u):
    # Rational approximation of the standard normal quantile (used only to
    # seed Newton; accuracy ~1e-9 is ample for a starting point).
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425
    if u < p_low:
        q = math.sqrt(-2.0 * math.log(u))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if u > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - u))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = u - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def _invert_cdf(cdf, pdf, u, mean, start):
    """Safeguarded Newton on a monotone cdf over (0, inf).

    The bracket is grown geometrically from ``mean`` until it contains the
    quantile; Newton steps that leave the bracket fall back to bisection.
    """
    lo = 0.0
    hi = max(mean, 1e-8)
    f_hi = cdf(hi) - u
    growth = 0
    while f_hi < 0.0:
        lo = hi
        hi *= 2.0
        f_hi = cdf(hi) - u
        growth += 1
        if growth > 700:
            raise NumericError(f"quantile bracket failed to capture u={u}")
    x = start if lo < start <= hi else 0.5 * (lo + hi)
    best_x, best_f = x, math.inf
    for it in range(1, _MAX_NEWTON + 1):
        f = cdf(x) - u
        af = abs(f)
        if af < best_f:
            best_x, best_f = x, af
        if af <= _RESIDUAL:
            return QuantileResult(value=x, iterations=it, residual=af)
        if f < 0.0:
            lo = x
        else:
            hi = x
        dens = pdf(x)
        if dens > 0.0:
            nxt = x - f / dens
            if not lo < nxt < hi:
                nxt = 0.5 * (lo + hi)
        else:
            nxt = 0.5 * (lo + hi)
        x = nxt
    raise NumericError(
        f"quantile solver exceeded {_MAX_NEWTON} iterations "
        f"(best value {best_x}, residual {best_f})",
        value=best_x,
        residual=best_f,
    )


def gamma_quantile(a, u):
    """Inverse of the Gamma(a, 1) cdf, returned with solver diagnostics."""
    a = _check_scalar("a", a)
    u = _check_scalar("u", u)
    if a <= 0.0:
        raise DomainError(f"gamma_quantile requires a > 0, got {a}")
    if not 0.0 < u < 1.0:
        raise DomainError(f"gamma_quantile requires 0 < u < 1, got {u}")
    # Wilson-Hilferty starting point, clipped into the bracket by the solver.
    z = _norm_quantile(u)
    cube = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * math.sqrt(a))
    start = a * cube * cube * cube if cube > 0.0 else a * math.exp(z / math.sqrt(a))
    return _invert_cdf(lambda x: gamma_cdf(a, x), lambda x: _gamma_pdf(a, x), u, a, start)


def fisher_quantile(d1, d2, u):
    """Inverse of the Fisher cdf with d1 (integer) and d2 degrees of freedom."""
    if int(d1) != d1 or d1 < 1:
        raise DomainError(f"fisher_quantile requires integer d1 >= 1, got {d1!r}")
    d1 = float(d1)
    d2 = _check_scalar("d2", d2)
    if d2 <= 0.0:
        raise DomainError(f"fisher_quantile requires d2 > 0, got {d2}")
    u = _check_scalar("u", u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"fisher_quantile requires 0 < u < 1, got {u}")
    a = 0.5 * d1
    b = 0.5 * d2
    ln_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

    def pdf(x):
        if x <= 0.0:
            return 0.0
        y = d1 * x / (d1 * x + d2)
        ln_dens = (a - 1.0) * math.log(y) + (b - 1.0) * math.log1p(-y) - ln_beta
        return math.exp(ln_dens) * d1 * d2 / (d1 * x + d2) ** 2

    mean = d2 / (d2 - 2.0) if d2 > 2.0 else 1.0
    return _invert_cdf(lambda x: fisher_cdf(d1, d2, x), pdf, u, mean, mean)
