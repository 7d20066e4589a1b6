"""Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).

The propagated solution is 5th order; the embedded 4th order solution gives
the local error estimate for step-size control.  Output is produced by
landing steps exactly on the requested sample times, which keeps the
sampled values free of interpolation error.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = ["StepSizeError", "NegativeDispersionError", "dopri5"]


class StepSizeError(ArithmeticError):
    """The controller asked for a step below the resolvable minimum."""


class NegativeDispersionError(ArithmeticError):
    """An accepted step produced a non-positive dispersion."""


_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# difference between 5th and embedded 4th order weights
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(fun, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_eval,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    max_steps: int = 100_000,
    positive: bool = False,
    on_sample: Callable[[float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Integrate ``y' = fun(t, y)`` from ``t0`` and sample at ``t_eval``.

    Parameters
    ----------
    fun : callable
        Right-hand side returning an array shaped like ``y``.
    t0 : float
        Initial time; must not exceed ``t_eval[0]``.
    y0 : array_like
        Initial state.
    t_eval : array_like
        Non-decreasing sample times.
    positive : bool
        Raise :class:`NegativeDispersionError` if any component of an
        accepted state is <= 0.
    on_sample : callable, optional
        Called as ``on_sample(t, y)`` at each sample time.

    Returns
    -------
    ndarray
        ``len(t_eval)`` rows of the state.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=float, ndmin=1)
    if t_eval.size and t_eval[0] < t0:
        raise ValueError("t_eval must start at or after t0")
    if np.any(np.diff(t_eval) < 0):
        raise ValueError("t_eval must be non-decreasing")

    out = np.empty((t_eval.size,) + y.shape)
    t = float(t0)
    f = np.asarray(fun(t, y), dtype=float)
    h = None
    steps = 0
    k = [None] * 7

    for idx, t_target in enumerate(t_eval):
        while t < t_target:
            if h is None:
                h = _initial_step(fun, t, y, f, rtol, atol)
            h_min = 16 * np.spacing(max(abs(t), abs(t_target)))
            last = h >= t_target - t
            h_try = t_target - t if last else h
            if h_try < h_min and not last:
                raise StepSizeError(f"step size underflow at t={t!r} (h={h_try!r})")

            k[0] = f
            for s in range(1, 7):
                dy = sum(a * ki for a, ki in zip(_A[s], k[:s]) if a != 0.0)
                k[s] = np.asarray(fun(t + _C[s] * h_try, y + h_try * dy), dtype=float)
            y_new = y + h_try * sum(b * ki for b, ki in zip(_B, k) if b != 0.0)
            err = h_try * sum(e * ki for e, ki in zip(_E, k) if e != 0.0)
            err_norm = _error_norm(err, y, y_new, rtol, atol)

            steps += 1
            if steps > max_steps:
                raise StepSizeError(f"exceeded {max_steps} steps before t={t_target!r}")

            if not np.all(np.isfinite(y_new)):
                err_norm = math.inf
            if err_norm <= 1.0:
                if positive and np.any(y_new <= 0):
                    raise NegativeDispersionError(f"dispersion became non-positive near t={t + h_try!r}")
                t = t_target if last else t + h_try
                y = y_new
                f = k[6]
                factor = _MAX_FACTOR if err_norm == 0 else min(_MAX_FACTOR, _SAFETY * err_norm ** -0.2)
                # a shortened final step says nothing about the controller's h
                if not last or h_try >= h:
                    h = h_try * factor
            else:
                factor = max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2) if math.isfinite(err_norm) else _MIN_FACTOR
                h = h_try * factor
                if h < h_min:
                    raise StepSizeError(f"step size underflow at t={t!r} (h={h!r})")
        out[idx] = y
        if on_sample is not None:
            on_sample(t, y.copy())
    return out
