"""Conservative finite-difference solvers for semiclassical Smoluchowski equations.

Both forms share the structure

    dP/dt = d/dx [ P * u(x) / zeta + d/dx (D_eff(x) * P) ]

with D_eff = D (1 + beta**2 hbar**2 V''/(12 m)).  The ``coffey`` form uses
u = V'; the ``ankerhold`` form uses the derivative of the effective potential
V + beta hbar**2 V''/(24 m), i.e. u = V' + beta hbar**2 V'''/(24 m).

The grid is vertex-centred: node i owns a control volume of width dx (dx/2
at the two ends), interface fluxes use arithmetic means of P*u and a
two-point difference of D_eff*P, and the end interfaces carry no flux.  The
trapezoid integral of P is therefore conserved to rounding error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import PhysicalParams, Potential

__all__ = [
    "FORMS",
    "SemiclassicalValidityError",
    "NegativeDensityError",
    "GridState",
    "EffectiveFields",
    "Moments",
    "gaussian_state",
    "build_effective_fields",
    "stable_dt",
    "evolve",
    "stationary_solution_oracle",
    "discrete_stationary_state",
    "moments",
]

FORMS = ("coffey", "ankerhold")
CLAMP_EPS = 1e-3
NEGATIVE_TOL = 1e-8
CFL = 0.4


class SemiclassicalValidityError(ValueError):
    """D_eff <= 0 somewhere: the hbar**2 expansion has broken down."""


class NegativeDensityError(ArithmeticError):
    pass


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


@dataclass
class GridState:
    x_lo: float
    x_hi: float
    P: np.ndarray
    t: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.P = np.ascontiguousarray(self.P, dtype=float)
        if self.P.ndim != 1 or self.P.size < 64:
            raise ValueError(f"grid needs at least 64 points, got {self.P.size}")
        if not self.x_hi > self.x_lo:
            raise ValueError("grid needs x_hi > x_lo")

    @property
    def n(self) -> int:
        return self.P.size

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n, self.dx)

    def norm(self) -> float:
        return float(np.dot(self.weights, self.P))

    def normalized(self) -> "GridState":
        return GridState(self.x_lo, self.x_hi, self.P / self.norm(), self.t, dict(self.info))

    def copy(self) -> "GridState":
        return GridState(self.x_lo, self.x_hi, self.P.copy(), self.t, dict(self.info))


def gaussian_state(x_lo: float, x_hi: float, n: int, sigma2: float, mean: float = 0.0) -> GridState:
    x = np.linspace(x_lo, x_hi, n)
    P = np.exp(-((x - mean) ** 2) / (2 * sigma2))
    return GridState(x_lo, x_hi, P).normalized()


@dataclass
class EffectiveFields:
    x: np.ndarray
    d_eff: np.ndarray
    v_eff_prime: np.ndarray
    form: str
    valid: bool = True

    def clamped(self, D: float, eps: float = CLAMP_EPS) -> "EffectiveFields":
        return EffectiveFields(self.x, np.maximum(self.d_eff, eps * D), self.v_eff_prime, self.form, self.valid)


def build_effective_fields(V: Potential, p: PhysicalParams, form: str, x) -> EffectiveFields:
    """Evaluate D_eff and the drift derivative on the nodes ``x``.

    ``valid`` is False when D_eff <= 0 at any node.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")
    x = np.asarray(x, dtype=float)
    q = p.beta**2 * p.hbar**2 / (12 * p.mass)
    d_eff = p.D * (1 + q * V.d2V(x))
    v = V.dV(x)
    if form == "ankerhold":
        if V.kind == "tabulated":
            warnings.warn("third derivative of a tabulated potential taken by an extra finite difference",
                          RuntimeWarning, stacklevel=2)
        v = v + p.beta * p.hbar**2 * V.d3V(x) / (24 * p.mass)
    d_eff = np.ascontiguousarray(d_eff, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    return EffectiveFields(x, d_eff, v, form, bool(np.all(d_eff > 0)))


def stable_dt(fields: EffectiveFields, p: PhysicalParams, dx: float) -> float:
    """Largest step allowed by the diffusive and drift CFL bounds (factor 0.4)."""
    dt = CFL * dx * dx / float(np.max(fields.d_eff))
    vmax = float(np.max(np.abs(fields.v_eff_prime)))
    if vmax > 0:
        dt = min(dt, CFL * dx * p.zeta / vmax)
    return dt


def _check_fields(fields: EffectiveFields, state: GridState, p: PhysicalParams, override: bool):
    if fields.d_eff.shape != state.P.shape:
        raise ValueError("effective fields and grid have different sizes")
    if not fields.valid:
        if not override:
            raise SemiclassicalValidityError("semiclassical validity violated: D_eff <= 0 on the grid")
        return fields.clamped(p.D), True
    return fields, False


def evolve(state: GridState, fields: EffectiveFields, p: PhysicalParams, t_end: float,
           dt: float | None = None, override: bool = False, chunk: int = 2000) -> GridState:
    """Advance ``state`` to time ``t_end`` with SSP-RK2 steps.

    The step is the CFL bound (or ``dt`` if smaller) shortened so that an
    integer number of steps lands on ``t_end``.  With ``override`` a
    non-positive D_eff is clamped to 1e-3 D instead of raising; the
    returned ``info`` records this together with the step count, step size
    and minimum density seen.
    """
    fields, clamped = _check_fields(fields, state, p, override)
    span = t_end - state.t
    if span < 0:
        raise ValueError("t_end precedes the state's time")
    dt_max = stable_dt(fields, p, state.dx)
    if dt is not None:
        dt_max = min(dt_max, dt)
    nsteps = int(math.ceil(span / dt_max)) if span > 0 else 0
    step = span / nsteps if nsteps else 0.0

    out = state.copy()
    pmin = float(out.P.min())
    done = 0
    while done < nsteps:
        k = min(chunk, nsteps - done)
        pmin = min(pmin, kernels.pde_heun_steps(out.P, fields.d_eff, fields.v_eff_prime, p.zeta, out.dx, step, k))
        done += k
        if pmin < -NEGATIVE_TOL:
            raise NegativeDensityError(f"density fell to {pmin:.3g} near t={state.t + done * step!r}")
    out.t = t_end
    info = dict(state.info)
    info.update(form=fields.form, steps=info.get("steps", 0) + nsteps, dt=step,
                min_P=min(pmin, info.get("min_P", np.inf)), clamped=clamped or info.get("clamped", False),
                backend=kernels.BACKEND)
    out.info = info
    return out


def stationary_solution_oracle(fields: EffectiveFields, p: PhysicalParams, x_lo: float, x_hi: float) -> GridState:
    """Zero-flux stationary density of the continuum equation.

    P_s ~ exp(-integral of u/(zeta D_eff)) / D_eff, the integral taken by the
    cumulative trapezoid rule on the field nodes.
    """
    if np.any(fields.d_eff <= 0):
        raise SemiclassicalValidityError("semiclassical validity violated: D_eff <= 0 on the grid")
    dx = (x_hi - x_lo) / (fields.d_eff.size - 1)
    h = fields.v_eff_prime / (p.zeta * fields.d_eff)
    expo = np.concatenate([[0.0], np.cumsum(0.5 * (h[1:] + h[:-1]) * dx)])
    # shift by the minimum exponent to avoid overflow
    P = np.exp(-(expo - expo.min())) / fields.d_eff
    return GridState(x_lo, x_hi, P).normalized()


def discrete_stationary_state(fields: EffectiveFields, p: PhysicalParams, x_lo: float, x_hi: float) -> GridState:
    """Exact fixed point of the discrete scheme used by :func:`evolve`.

    Zero interface flux gives the two-term recurrence
    g[i+1] (1 + a[i+1]) = g[i] (1 - a[i]) for g = D_eff P and
    a = u dx / (2 zeta D_eff).
    """
    if np.any(fields.d_eff <= 0):
        raise SemiclassicalValidityError("semiclassical validity violated: D_eff <= 0 on the grid")
    dx = (x_hi - x_lo) / (fields.d_eff.size - 1)
    a = fields.v_eff_prime * dx / (2 * p.zeta * fields.d_eff)
    if np.any(np.abs(a) >= 1):
        raise ValueError("cell Peclet number >= 2: the discrete stationary state is not positive")
    log_ratio = np.log1p(-a[:-1]) - np.log1p(a[1:])
    log_g = np.concatenate([[0.0], np.cumsum(log_ratio)])
    P = np.exp(log_g - log_g.max()) / fields.d_eff
    return GridState(x_lo, x_hi, P).normalized()


@dataclass(frozen=True)
class Moments:
    norm: float
    mean: float
    variance: float


def moments(state: GridState) -> Moments:
    """Trapezoid-rule norm, mean and variance (moments of the normalized density)."""
    w = state.weights * state.P
    norm = float(w.sum())
    x = state.x
    mean = float(np.dot(w, x) / norm)
    variance = float(np.dot(w, (x - mean) ** 2) / norm)
    return Moments(norm, mean, variance)
