"""Real branches of the Lambert W function and a stable hyperbolic cotangent.

Both Lambert branches are built from scratch: an initial guess (branch-point
series or logarithmic asymptotics) refined by Halley iteration.  Within 1e-6
of the branch point the series is used directly, since Halley loses an order
of convergence where the derivative of ``w*exp(w)`` vanishes.

All functions accept scalars or array_like input; arrays are evaluated
elementwise and returned as float arrays.
"""
from __future__ import annotations

import functools
import math

import numpy as np

__all__ = [
    "BRANCH_POINT",
    "DomainError",
    "ConvergenceError",
    "lambert_w0",
    "lambert_wm1",
    "lambert_wm1_expneg",
    "coth_stable",
]

#: -1/e, where the branches W0 and W-1 meet at w = -1.
BRANCH_POINT = -math.exp(-1.0)

# 1/e split into a double and its rounding error, so that x + 1/e is exact
# for x near the branch point.
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17

_BRANCH_TOL = 1e-15
_SERIES_BAND = 1e-6
_COTH_SWITCH = 1e-2
_MAX_ITER = 40

# W = sum(mu_k * p**k), p = +-sqrt(2*(1 + e*x)); + for W0, - for W-1.
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
)


class DomainError(ValueError):
    """Argument outside the real domain of a special function."""


class ConvergenceError(ArithmeticError):
    """Halley iteration failed to reach the requested tolerance."""


def _elementwise(func):
    @functools.wraps(func)
    def wrapper(x, *args, **kwargs):
        if np.ndim(x) == 0:
            return func(float(x), *args, **kwargs)
        arr = np.asarray(x, dtype=float)
        out = np.empty(arr.shape)
        flat = out.reshape(-1)
        for i, xi in enumerate(arr.reshape(-1)):
            flat[i] = func(float(xi), *args, **kwargs)
        return out

    return wrapper


def _branch_offset(x: float) -> float:
    """Return 1 + e*x, accurate to a few ulps of x near -1/e."""
    return ((x + _INV_E_HI) + _INV_E_LO) * math.e


def _branch_series(p: float) -> float:
    w = 0.0
    for mu in reversed(_BRANCH_SERIES):
        w = w * p + mu
    return w


def _halley(x: float, w: float, lower_branch: bool) -> float:
    """Refine ``w`` towards the root of w*exp(w) = x.

    For large positive x the scaled residual w - x*exp(-w) is used to keep
    the exponential finite.
    """
    scaled = x > 1.0
    for _ in range(_MAX_ITER):
        if scaled:
            g = x * math.exp(-w)
            f = w - g
            f1 = 1.0 + g
            f2 = -g
            dw = f / (f1 - 0.5 * f * f2 / f1)
        else:
            ew = math.exp(w)
            f = w * ew - x
            wp1 = w + 1.0
            if wp1 == 0.0:
                return w
            dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - dw
        # keep the iterate on its branch
        if lower_branch and w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        elif not lower_branch and w_new < -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 1e-14 * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    raise ConvergenceError(f"Lambert W did not converge at x={x!r}")


@_elementwise
def lambert_w0(x: float) -> float:
    """Principal branch W0(x) for x >= -1/e, returning w >= -1.

    Raises
    ------
    DomainError
        If x < -1/e by more than 1e-15.
    """
    if math.isnan(x):
        return math.nan
    if x < BRANCH_POINT - _BRANCH_TOL:
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    q = _branch_offset(x)
    if q <= 0.0:
        return -1.0
    if x - BRANCH_POINT < _SERIES_BAND:
        return _branch_series(math.sqrt(2.0 * q))
    if x < -0.25:
        w = _branch_series(math.sqrt(2.0 * q))
    elif x < math.e:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    return _halley(x, w, lower_branch=False)


@_elementwise
def lambert_wm1(x: float) -> float:
    """Lower real branch W-1(x) for -1/e <= x < 0, returning w <= -1.

    Raises
    ------
    DomainError
        If x >= 0 or x < -1/e by more than 1e-15.
    """
    if math.isnan(x):
        return math.nan
    if x >= 0.0 or x < BRANCH_POINT - _BRANCH_TOL:
        raise DomainError(f"lambert_wm1 requires -1/e <= x < 0, got {x!r}")
    q = _branch_offset(x)
    if q <= 0.0:
        return -1.0
    if x - BRANCH_POINT < _SERIES_BAND:
        return _branch_series(-math.sqrt(2.0 * q))
    if x < -0.25:
        w = _branch_series(-math.sqrt(2.0 * q))
    else:
        l1 = math.log(-x)
        w = l1 - math.log(-l1)
    return _halley(x, w, lower_branch=True)


def _s_minus_log1p(s: float) -> float:
    """s - log1p(s) without cancellation for small s."""
    if abs(s) < 0.1:
        acc = 0.0
        for k in range(17, 1, -1):
            acc = s * ((1.0 if k % 2 == 0 else -1.0) / k + acc)
        return s * acc
    return s - math.log1p(s)


@_elementwise
def lambert_wm1_expneg(tau: float) -> float:
    """Return W-1(-exp(-1 - tau)) for tau >= 0.

    The argument is passed through its exponent so that neither the
    cancellation in 1 + e*x for small tau nor the underflow of exp(-1 - tau)
    for large tau costs precision.  Solves s - log1p(s) = tau for
    s = -1 - W by Halley iteration.
    """
    if math.isnan(tau):
        return math.nan
    if tau < 0.0:
        raise DomainError(f"lambert_wm1_expneg requires tau >= 0, got {tau!r}")
    if tau == 0.0:
        return -1.0
    if math.isinf(tau):
        return -math.inf
    # 1 + e*x = 1 - exp(-tau)
    p = math.sqrt(-2.0 * math.expm1(-tau))
    if tau < _SERIES_BAND:
        return _branch_series(-p)
    if tau < 2.0:
        s = -1.0 - _branch_series(-p)
    else:
        s = tau + math.log1p(tau + math.log1p(tau))
    for _ in range(_MAX_ITER):
        f = _s_minus_log1p(s) - tau
        f1 = s / (1.0 + s)
        f2 = 1.0 / ((1.0 + s) * (1.0 + s))
        ds = f / (f1 - 0.5 * f * f2 / f1)
        s_new = s - ds
        if s_new <= 0.0:
            s_new = 0.5 * s
        if abs(s_new - s) <= 1e-14 * abs(s_new):
            return -1.0 - s_new
        s = s_new
    raise ConvergenceError(f"lambert_wm1_expneg did not converge at tau={tau!r}")


@_elementwise
def coth_stable(u: float) -> float:
    """Hyperbolic cotangent for u > 0.

    Uses the Laurent series below u = 1e-2 and 1 + 2/expm1(2u) above; past
    u = 20 the tail 2 exp(-2u) saturates to 1 without overflow.
    """
    if not u > 0.0:
        raise DomainError(f"coth_stable requires u > 0, got {u!r}")
    if u < _COTH_SWITCH:
        u2 = u * u
        return 1.0 / u + u * (1.0 / 3.0 - u2 * (1.0 / 45.0 - u2 * (2.0 / 945.0 - u2 / 4725.0)))
    if u > 20.0:
        return 1.0 + 2.0 * math.exp(-2.0 * u)
    return 1.0 + 2.0 / math.expm1(2.0 * u)
