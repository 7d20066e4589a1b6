"""Regime diagnostics: local exponents, crossover scales, trajectory metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dispersion import DispersionTrajectory
from .model import ArrheniusModel, PhysicalParams

__all__ = [
    "ExponentSeries",
    "local_exponent",
    "log_derivative",
    "CrossoverScales",
    "crossover_scales",
    "TrajectoryErrors",
    "compare_trajectories",
    "early_exponent",
]


@dataclass
class ExponentSeries:
    times: np.ndarray
    alpha: np.ndarray
    derivation: str = "log-log centred difference"


def log_derivative(t, y) -> np.ndarray:
    """d ln y / d ln t at the interior points, by the three-point formula.

    The formula is exact for quadratics in ln t, so pure power laws come out
    exact on any grid.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(t <= 0) or np.any(y <= 0):
        raise ValueError("times and values must be positive")
    u = np.log(t)
    v = np.log(y)
    h0 = u[1:-1] - u[:-2]
    h1 = u[2:] - u[1:-1]
    return (
        -h1 / (h0 * (h0 + h1)) * v[:-2]
        + (h1 - h0) / (h0 * h1) * v[1:-1]
        + h0 / (h1 * (h0 + h1)) * v[2:]
    )


def local_exponent(traj: DispersionTrajectory) -> ExponentSeries:
    """Exponent alpha of sigma ~ t**alpha, i.e. half the log-slope of sigma2."""
    return ExponentSeries(traj.times[1:-1].copy(), 0.5 * log_derivative(traj.times, traj.sigma2))


def early_exponent(times, sigma2, n: int = 5) -> float:
    """Least-squares alpha over the first ``n`` positive samples."""
    t = np.asarray(times, dtype=float)
    s = np.asarray(sigma2, dtype=float)
    keep = (t > 0) & (s > 0)
    t, s = t[keep][:n], s[keep][:n]
    if t.size < 2:
        return math.nan
    return 0.5 * float(np.polyfit(np.log(t), np.log(s), 1)[0])


class CrossoverScales(NamedTuple):
    t_cross: float
    lambda_T: float
    lambda_E: float | None
    sigma2_quantum_10pct: float


def crossover_scales(p: PhysicalParams, a: ArrheniusModel | None = None) -> CrossoverScales:
    """Quantum-classical crossover scales.

    ``sigma2_quantum_10pct`` is the dispersion 10 lambda_T**2 at which the
    quantum enhancement lambda_T**2/sigma2 of the constant-sigma rate falls
    to 10%.
    """
    lam = p.lambda_T
    lam_e = a.lambda_E(p) if a is not None else None
    return CrossoverScales(p.t_cross, lam, lam_e, 10 * lam * lam)


class TrajectoryErrors(NamedTuple):
    max_rel_err: float
    l2_rel_err: float
    max_abs_err: float
    resampled: bool


def _resample(src: DispersionTrajectory, times: np.ndarray) -> np.ndarray:
    keep = (src.times > 0) & (src.sigma2 > 0)
    interp = PchipInterpolator(np.log(src.times[keep]), np.log(src.sigma2[keep]), extrapolate=False)
    return np.exp(interp(np.log(times)))


def compare_trajectories(a: DispersionTrajectory, b: DispersionTrajectory) -> TrajectoryErrors:
    """Pointwise errors between two trajectories.

    Relative errors use max(|a|, |b|, 1e-300) as the scale.  If the time
    grids differ, ``b`` is resampled onto the part of ``a``'s grid inside its
    own positive range by monotone cubic interpolation in (ln t, ln sigma2),
    and ``resampled`` is set.
    """
    if a.times.shape == b.times.shape and np.array_equal(a.times, b.times):
        ta, ya, yb = a.times, a.sigma2, b.sigma2
        resampled = False
    else:
        pos = b.times[(b.times > 0) & (b.sigma2 > 0)]
        if pos.size < 2:
            raise ValueError("trajectory b has too few positive samples to resample")
        mask = (a.times >= pos[0]) & (a.times <= pos[-1])
        if not np.any(mask):
            raise ValueError("trajectories do not overlap in time")
        ta, ya = a.times[mask], a.sigma2[mask]
        yb = _resample(b, ta)
        resampled = True
    if ta.size == 0:
        raise ValueError("trajectories do not overlap in time")
    diff = np.abs(ya - yb)
    scale = np.maximum(np.maximum(np.abs(ya), np.abs(yb)), 1e-300)
    rel = diff / scale
    return TrajectoryErrors(float(rel.max()), float(np.sqrt(np.mean(rel**2))), float(diff.max()), resampled)
