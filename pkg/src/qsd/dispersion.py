"""Gaussian-ansatz dispersion dynamics of a quantum Brownian particle.

Seven trajectory modes are available:

``beta_resolved``
    The coupled family of dispersions sigma2(t, b) over inverse temperatures
    b in (beta_min, beta], coupled through the imaginary-time integral of
    hbar**2/(4 m sigma2**2).  Harmonic when ``omega0 > 0``, free otherwise.
``constant_sigma``
    The same equation with the integrand frozen at the current dispersion,
    giving ``2D(1 + lambda_T**2/sigma2 - beta m omega0**2 sigma2)``.
``relaxed``
    The harmonic equation with the quantum term evaluated at the classical
    equilibrium, a linear ODE with a closed form.
``closed_form``
    Exact free-particle solution of the constant-sigma equation through the
    lower Lambert branch.
``elementary_approx``, ``log_law``, ``early_power``
    Elementary approximation and the long- and short-time laws.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .model import ArrheniusModel, PhysicalParams, dbeta_beta_zeta
from .ode import NegativeDispersionError, dopri5
from .specfun import coth_stable, lambert_wm1_expneg

__all__ = [
    "MODES",
    "DegenerateInputError",
    "QuadratureResolutionWarning",
    "DispersionTrajectory",
    "BetaFamilyState",
    "equilibrium_dispersion_harmonic",
    "relaxed_fixed_point",
    "constant_sigma_fixed_point",
    "rhs_relaxed_harmonic",
    "solve_relaxed_harmonic_analytic",
    "rhs_constant_sigma",
    "solve_free_closed_form",
    "elementary_approx_free",
    "log_law_free",
    "fit_log_law_const",
    "early_power_law",
    "beta_grid",
    "beta_family_rhs",
    "solve_beta_resolved",
    "integrate_dispersion_ode",
    "solve_constant_sigma",
    "coth_profile",
    "seed_time",
    "classical_dispersion",
    "trajectory",
]

MODES = (
    "beta_resolved",
    "constant_sigma",
    "relaxed",
    "closed_form",
    "log_law",
    "early_power",
    "elementary_approx",
)

SEED_FRACTION = 1e-8


class DegenerateInputError(ValueError):
    """Parameters for which a mode has no meaning (e.g. hbar = 0 in a quantum-only law)."""


class QuadratureResolutionWarning(RuntimeWarning):
    """Doubling the beta grid changed the result by more than 1e-4 relative."""


def _params_dict(p: PhysicalParams) -> dict:
    return {k: getattr(p, k) for k in ("mass", "zeta", "beta", "hbar", "omega0")}


@dataclass
class DispersionTrajectory:
    times: np.ndarray
    sigma2: np.ndarray
    mode: str
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.sigma2 = np.asarray(self.sigma2, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"unknown dispersion mode {self.mode!r}")
        if self.times.shape != self.sigma2.shape or self.times.ndim != 1:
            raise ValueError("times and sigma2 must be 1-D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        # the log law is an asymptote and may dip below zero before the crossover
        if self.mode == "log_law":
            return
        positive = self.sigma2 > 0
        if not np.all(positive[1:]) or not (positive[0] or self.sigma2[0] == 0.0):
            raise ValueError("sigma2 must be positive (sigma2[0] may be 0)")

    def __len__(self):
        return self.times.size


@dataclass
class BetaFamilyState:
    beta_grid: np.ndarray
    sigma2_field: np.ndarray
    t: float = 0.0


# -- harmonic equilibria ----------------------------------------------------


def equilibrium_dispersion_harmonic(p: PhysicalParams) -> float:
    """Quantum equilibrium (hbar/(2 m omega0)) coth(beta hbar omega0/2)."""
    if p.omega0 == 0:
        raise DegenerateInputError("a free particle has no equilibrium dispersion")
    if p.hbar == 0:
        return 1.0 / (p.beta * p.mass * p.omega0**2)
    return p.hbar / (2 * p.mass * p.omega0) * coth_stable(0.5 * p.beta * p.hbar * p.omega0)


def relaxed_fixed_point(p: PhysicalParams) -> float:
    if p.omega0 == 0:
        raise DegenerateInputError("relaxed mode needs omega0 > 0")
    return (1 + (p.beta * p.hbar * p.omega0) ** 2 / 12) / (p.beta * p.mass * p.omega0**2)


def constant_sigma_fixed_point(p: PhysicalParams) -> float:
    """Positive root of beta m omega0**2 s**2 - s - lambda_T**2 = 0."""
    if p.omega0 == 0:
        raise DegenerateInputError("constant-sigma fixed point needs omega0 > 0")
    k = p.beta * p.mass * p.omega0**2
    disc = 1 + 4 * k * p.lambda_T**2
    # (1 + sqrt(disc)) / (2k), written without cancellation
    return (1 + math.sqrt(disc)) / (2 * k)


# -- relaxed (linear) harmonic mode -------------------------------------------


def rhs_relaxed_harmonic(sigma2, p: PhysicalParams):
    return 2 * p.D * (1 + (p.beta * p.hbar * p.omega0) ** 2 / 12 - p.beta * p.mass * p.omega0**2 * sigma2)


def solve_relaxed_harmonic_analytic(sigma2_0: float, t, p: PhysicalParams):
    if p.omega0 == 0:
        raise DegenerateInputError("relaxed mode needs omega0 > 0")
    s_inf = relaxed_fixed_point(p)
    rate = 2 * p.D * p.beta * p.mass * p.omega0**2
    return s_inf + (sigma2_0 - s_inf) * np.exp(-rate * np.asarray(t, dtype=float))


# -- constant-sigma mode and its free closed form ----------------------------


def rhs_constant_sigma(sigma2, p: PhysicalParams):
    s = np.asarray(sigma2, dtype=float)
    if np.any(s <= 0):
        raise ValueError("rhs_constant_sigma is singular for sigma2 <= 0")
    out = 2 * p.D * (1 + p.lambda_T**2 / s - p.beta * p.mass * p.omega0**2 * s)
    return out if out.ndim else float(out)


def solve_free_closed_form(t, p: PhysicalParams):
    """Exact free-particle solution lambda_T**2 * (-1 - W_{-1}(-exp(-1 - 2Dt/lambda_T**2)))."""
    if p.hbar == 0:
        raise DegenerateInputError("closed form needs hbar > 0; use 2Dt for hbar = 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("solve_free_closed_form needs t >= 0")
    lam2 = p.lambda_T**2
    out = lam2 * (-1.0 - lambert_wm1_expneg(2 * p.D * t / lam2))
    return out if np.ndim(out) else float(out)


def elementary_approx_free(t, p: PhysicalParams):
    """2Dt + 2 lambda_T**2 ln(1 + sqrt(Dt)/lambda_T)."""
    t = np.asarray(t, dtype=float)
    lam = p.lambda_T
    if lam == 0:
        out = 2 * p.D * t
    else:
        out = 2 * p.D * t + 2 * lam**2 * np.log1p(np.sqrt(p.D * t) / lam)
    return out if out.ndim else float(out)


def log_law_free(t, const: float, p: PhysicalParams):
    """Semiclassical long-time law 2Dt + lambda_T**2 ln t + const."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("log_law_free needs t > 0")
    out = 2 * p.D * t + p.lambda_T**2 * np.log(t) + const
    return out if out.ndim else float(out)


def fit_log_law_const(p: PhysicalParams, t_lo: float | None = None, t_hi: float | None = None, n: int = 64):
    """Least-squares constant of the log law against the exact solution.

    Returns ``(const, slope)``: ``slope`` is the fitted drift
    d/dt[exact - 2Dt - lambda_T**2 ln t] over the window, which vanishes as
    the window moves to large t.  Defaults to [10, 1000] t_cross.
    """
    if p.hbar == 0:
        return 0.0, 0.0
    t_lo = 10 * p.t_cross if t_lo is None else t_lo
    t_hi = 1000 * p.t_cross if t_hi is None else t_hi
    t = np.geomspace(t_lo, t_hi, n)
    resid = solve_free_closed_form(t, p) - 2 * p.D * t - p.lambda_T**2 * np.log(t)
    slope, _ = np.polyfit(t, resid, 1)
    return float(np.mean(resid)), float(slope)


def early_power_law(t, p: PhysicalParams, zeta_model: ArrheniusModel | None = None):
    """Quantum-dominated short-time law sigma2 = sqrt(hbar**2 t / (m d(beta zeta)/dbeta)).

    With constant friction this is hbar*sqrt(t/(m zeta)); under an Arrhenius
    model it equals 2 lambda_E sqrt(D t).
    """
    if p.hbar == 0:
        raise DegenerateInputError("early power law needs hbar > 0")
    slope = dbeta_beta_zeta(p, zeta_model)
    if slope <= 0:
        raise ValueError(f"d(beta*zeta)/dbeta must be > 0, got {slope!r}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("early_power_law needs t >= 0")
    out = np.sqrt(p.hbar**2 * t / (p.mass * slope))
    return out if out.ndim else float(out)


def classical_dispersion(t, p: PhysicalParams, sigma2_0: float = 0.0):
    """hbar = 0 reference: sigma2_0 + 2Dt (free) or the classical OU relaxation."""
    t = np.asarray(t, dtype=float)
    if p.omega0 == 0:
        return sigma2_0 + 2 * p.D * t
    return solve_relaxed_harmonic_analytic(sigma2_0, t, p.replace(hbar=0.0))


# -- numeric integration -----------------------------------------------------


def integrate_dispersion_ode(
    rhs: Callable,
    sigma2_0: float,
    t_grid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    t0: float | None = None,
    mode: str = "constant_sigma",
    params: PhysicalParams | None = None,
) -> DispersionTrajectory:
    """Integrate d sigma2/dt = rhs(t, sigma2) and sample it on ``t_grid``.

    Integration starts at ``t0`` (default ``t_grid[0]``) from ``sigma2_0``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    t0 = float(t_grid[0]) if t0 is None else float(t0)
    if not sigma2_0 > 0:
        raise NegativeDispersionError(f"initial dispersion must be > 0, got {sigma2_0!r}")
    y = dopri5(lambda t, s: np.asarray(rhs(t, s), dtype=float), t0, [sigma2_0], t_grid,
               rtol=rtol, atol=atol, positive=True)
    return DispersionTrajectory(
        t_grid, y[:, 0], mode,
        _params_dict(params) if params is not None else {},
        {"rtol": rtol, "atol": atol, "t0": t0, "sigma2_0": sigma2_0},
    )


def seed_time(p: PhysicalParams) -> float:
    return SEED_FRACTION * p.t_cross


def solve_constant_sigma(t_grid, p: PhysicalParams, sigma2_0: float | None = None,
                         rtol: float = 1e-9, atol: float = 1e-12) -> DispersionTrajectory:
    """Numeric constant-sigma trajectory.

    Without ``sigma2_0`` the run starts at the origin: the 1/sigma2
    singularity is stepped over by seeding at t_seed = 1e-8 t_cross with the
    exact free solution, and any requested times before t_seed come from the
    closed form (the harmonic term is negligible there).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    rhs = lambda t, s: rhs_constant_sigma(s, p)  # noqa: E731
    if sigma2_0 is not None:
        return integrate_dispersion_ode(rhs, sigma2_0, t_grid, rtol, atol, t0=0.0,
                                        mode="constant_sigma", params=p)
    if p.hbar == 0:
        raise DegenerateInputError("constant-sigma from sigma2 = 0 needs hbar > 0")
    ts = seed_time(p)
    early = t_grid <= ts
    out = np.empty_like(t_grid)
    out[early] = solve_free_closed_form(t_grid[early], p)
    if np.any(~early):
        y = dopri5(lambda t, s: rhs_constant_sigma(s, p), ts, [solve_free_closed_form(ts, p)],
                   t_grid[~early], rtol=rtol, atol=atol, positive=True)
        out[~early] = y[:, 0]
    return DispersionTrajectory(t_grid, out, "constant_sigma", _params_dict(p),
                                {"rtol": rtol, "atol": atol, "t_seed": ts})


# -- beta-resolved family ------------------------------------------------------


def beta_grid(p: PhysicalParams, n_beta: int = 256, beta_min: float | None = None) -> np.ndarray:
    """Uniform grid of n_beta inverse temperatures from beta_min to beta."""
    if n_beta < 16:
        raise ValueError(f"n_beta must be >= 16, got {n_beta}")
    beta_min = p.beta / (4 * n_beta) if beta_min is None else float(beta_min)
    if not 0 < beta_min <= p.beta / n_beta:
        raise ValueError(f"beta_min must lie in (0, beta/n_beta], got {beta_min!r}")
    grid = np.linspace(beta_min, p.beta, n_beta)
    grid[-1] = p.beta
    return grid


def beta_family_rhs(sigma2_field, grid, p: PhysicalParams, out=None) -> np.ndarray:
    """d/dt of every family member.

    Member b obeys 2D(b)(1 + sigma2(b) I(b) - b m omega0**2 sigma2(b)) with
    D(b) = 1/(b zeta) and I(b) the trapezoid integral of hbar**2/(4 m sigma2**2)
    from 0 to b; below beta_min the integrand is held at its first value.
    """
    s = np.ascontiguousarray(sigma2_field, dtype=float)
    g = np.ascontiguousarray(grid, dtype=float)
    if out is None:
        out = np.empty_like(s)
    return kernels.beta_family_rhs(s, g, p.zeta, p.mass, p.hbar, p.omega0, out)


def coth_profile(grid, p: PhysicalParams) -> np.ndarray:
    """Equilibrium dispersion of each family member."""
    return np.array([equilibrium_dispersion_harmonic(p.replace(beta=float(b))) for b in grid])


def solve_beta_resolved(
    sigma2_0: float,
    p: PhysicalParams,
    t_grid,
    n_beta: int = 256,
    beta_min: float | None = None,
    initial: str = "uniform",
    rtol: float = 1e-9,
    atol: float = 1e-12,
    check_resolution: bool = True,
    keep_history: bool = False,
    t0: float = 0.0,
):
    """Integrate the beta-resolved family and return the physical member.

    Parameters
    ----------
    sigma2_0 : float
        Initial dispersion of every member when ``initial='uniform'``.
    initial : {'uniform', 'coth'}
        Uniform quench or the equilibrium coth profile (harmonic only).
    check_resolution : bool
        Repeat the run with 2*n_beta and warn with
        :class:`QuadratureResolutionWarning` if the final dispersion moves
        by more than 1e-4 relative.
    t0 : float
        Time at which the family holds its initial profile; ``t_grid``
        must not start before it.

    Returns
    -------
    (DispersionTrajectory, list of BetaFamilyState)
        The history holds one state per sample time when ``keep_history``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    grid = beta_grid(p, n_beta, beta_min)
    if initial == "uniform":
        if not sigma2_0 > 0:
            raise NegativeDispersionError(f"initial dispersion must be > 0, got {sigma2_0!r}")
        y0 = np.full(n_beta, float(sigma2_0))
    elif initial == "coth":
        y0 = coth_profile(grid, p)
    else:
        raise ValueError(f"initial must be 'uniform' or 'coth', got {initial!r}")

    history = []
    on_sample = None
    if keep_history:
        def on_sample(t, y):
            history.append(BetaFamilyState(grid.copy(), y, t))

    buf = np.empty(n_beta)
    ys = dopri5(lambda t, y: beta_family_rhs(y, grid, p, buf).copy(), float(t0), y0, t_grid,
                rtol=rtol, atol=atol, positive=True, on_sample=on_sample)
    sigma2 = ys[:, -1]
    meta = {"n_beta": n_beta, "beta_min": float(grid[0]), "initial": initial, "rtol": rtol, "atol": atol}

    if check_resolution:
        fine, _ = solve_beta_resolved(sigma2_0, p, t_grid[[0, -1]] if t_grid.size > 1 else t_grid,
                                      2 * n_beta, None if beta_min is None else beta_min / 2, initial,
                                      rtol, atol, check_resolution=False, t0=t0)
        change = abs(fine.sigma2[-1] - sigma2[-1]) / abs(sigma2[-1])
        meta["resolution_change"] = float(change)
        if change > 1e-4:
            warnings.warn(f"doubling n_beta changed the final dispersion by {change:.3g} relative",
                          QuadratureResolutionWarning, stacklevel=2)

    traj = DispersionTrajectory(t_grid, sigma2, "beta_resolved", _params_dict(p), meta)
    return traj, history


# -- dispatch ------------------------------------------------------------------


def trajectory(mode: str, t_grid, p: PhysicalParams, sigma2_0: float = 0.0,
               zeta_model: ArrheniusModel | None = None, log_const: float | None = None,
               **options) -> DispersionTrajectory:
    """Produce a trajectory of any mode on ``t_grid``.

    ``sigma2_0`` is the dispersion at t = 0 for the ODE modes; the free
    closed-form family (closed_form, elementary_approx, early_power,
    log_law, constant_sigma with sigma2_0 = 0) starts from the origin.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    meta: dict = {}
    if mode == "closed_form":
        if p.omega0 != 0:
            raise DegenerateInputError("closed_form applies to the free particle only")
        s = solve_free_closed_form(t_grid, p)
    elif mode == "elementary_approx":
        s = elementary_approx_free(t_grid, p)
    elif mode == "log_law":
        if log_const is None:
            log_const, slope = fit_log_law_const(p)
            meta["log_const_fit_slope"] = slope
        meta["log_const"] = log_const
        s = log_law_free(t_grid, log_const, p)
    elif mode == "early_power":
        s = early_power_law(t_grid, p, zeta_model)
    elif mode == "constant_sigma":
        return solve_constant_sigma(t_grid, p, sigma2_0 if sigma2_0 > 0 else None,
                                    **{k: options[k] for k in ("rtol", "atol") if k in options})
    elif mode == "relaxed":
        s = solve_relaxed_harmonic_analytic(sigma2_0, t_grid, p)
    elif mode == "beta_resolved":
        traj, _ = solve_beta_resolved(sigma2_0, p, t_grid, **options)
        return traj
    else:
        raise ValueError(f"unknown dispersion mode {mode!r}")
    return DispersionTrajectory(t_grid, np.asarray(s, dtype=float), mode, _params_dict(p), meta)
