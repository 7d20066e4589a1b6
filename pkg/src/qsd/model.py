"""Physical parameters, derived length/time scales and the Arrhenius model.

Symbols follow the usual overdamped conventions: ``zeta`` is the friction
coefficient, ``beta = 1/k_B T``, ``D = 1/(beta*zeta)`` the Einstein diffusion
constant and ``lambda_T = hbar*sqrt(beta)/(2*sqrt(m))`` the thermal length.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "PhysicalParams",
    "DerivedScales",
    "derived_scales",
    "ArrheniusModel",
    "ArrheniusScales",
    "arrhenius_diffusion",
    "dbeta_beta_zeta",
    "Potential",
]

_MAX_EXPONENT = 700.0


def _require(cond: bool, name: str, value, rule: str) -> None:
    if not cond:
        raise ValueError(f"{name} must be {rule}, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    mass: float = 1.0
    zeta: float = 1.0
    beta: float = 1.0
    hbar: float = 1.0
    omega0: float = 0.0

    def __post_init__(self):
        for name in ("mass", "zeta", "beta"):
            v = getattr(self, name)
            _require(math.isfinite(v) and v > 0, name, v, "finite and > 0")
        for name in ("hbar", "omega0"):
            v = getattr(self, name)
            _require(math.isfinite(v) and v >= 0, name, v, "finite and >= 0")

    @property
    def D(self) -> float:
        return 1.0 / (self.beta * self.zeta)

    @property
    def lambda_T(self) -> float:
        return self.hbar * math.sqrt(self.beta) / (2.0 * math.sqrt(self.mass))

    @property
    def t_cross(self) -> float:
        return self.lambda_T**2 / (2.0 * self.D)

    def replace(self, **changes) -> "PhysicalParams":
        values = {k: getattr(self, k) for k in ("mass", "zeta", "beta", "hbar", "omega0")}
        values.update(changes)
        return PhysicalParams(**values)


class DerivedScales(NamedTuple):
    D: float
    lambda_T: float
    t_cross: float


def derived_scales(p: PhysicalParams) -> DerivedScales:
    """Einstein constant, thermal length and the crossover time lambda_T**2/(2D)."""
    return DerivedScales(p.D, p.lambda_T, p.t_cross)


@dataclass(frozen=True)
class ArrheniusModel:
    """Activated diffusion D(beta) = D0 * exp(-beta * Ea)."""

    D0: float
    Ea: float

    def __post_init__(self):
        _require(math.isfinite(self.D0) and self.D0 > 0, "D0", self.D0, "finite and > 0")
        _require(math.isfinite(self.Ea) and self.Ea > 0, "Ea", self.Ea, "finite and > 0")

    def diffusion(self, beta: float) -> float:
        return self.D0 * math.exp(-beta * self.Ea)

    def lambda_E(self, p: PhysicalParams) -> float:
        return p.hbar / (2.0 * math.sqrt(p.mass * self.Ea))


class ArrheniusScales(NamedTuple):
    D: float
    zeta: float
    lambda_E: float
    dbeta_beta_zeta: float


def arrhenius_diffusion(a: ArrheniusModel, beta: float, p: PhysicalParams) -> ArrheniusScales:
    """Diffusion, friction, activation length and d(beta*zeta)/dbeta at ``beta``.

    ``p`` supplies the mass and hbar for lambda_E.  Since beta*zeta = 1/D(beta),
    the derivative is Ea/D exactly.
    """
    _require(beta > 0, "beta", beta, "> 0")
    if beta * a.Ea > _MAX_EXPONENT:
        raise OverflowError(f"beta*Ea = {beta * a.Ea!r} exceeds {_MAX_EXPONENT}")
    D = a.diffusion(beta)
    return ArrheniusScales(D, 1.0 / (beta * D), a.lambda_E(p), a.Ea / D)


def dbeta_beta_zeta(p: PhysicalParams, zeta_model: ArrheniusModel | None = None) -> float:
    """d(beta*zeta)/dbeta: zeta for constant friction, Ea/D(beta) under Arrhenius."""
    if zeta_model is None:
        return p.zeta
    return arrhenius_diffusion(zeta_model, p.beta, p).dbeta_beta_zeta


def _second_difference(v: np.ndarray, dx: float) -> np.ndarray:
    """Second derivative, central inside and 4-point one-sided (2nd order) at the ends."""
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / dx**2
    d2[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / dx**2
    d2[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / dx**2
    return d2


@dataclass(frozen=True)
class Potential:
    """One-dimensional potential with derivatives up to third order.

    Build with :meth:`polynomial`, :meth:`harmonic`, :meth:`double_well` or
    :meth:`tabulated`.  Polynomial derivatives are exact; tabulated ones use
    second-order central differences with second-order one-sided edges and
    are linearly interpolated between samples.
    """

    kind: str
    x_lo: float
    x_hi: float
    coeffs: tuple = ()
    samples: tuple = ()
    _tables: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], x_lo: float = -np.inf, x_hi: float = np.inf):
        """``coeffs`` in increasing order: V = c0 + c1*x + ... + cd*x**d, d <= 8."""
        c = tuple(float(v) for v in coeffs) or (0.0,)
        if len(c) > 9:
            raise ValueError(f"polynomial degree must be <= 8, got {len(c) - 1}")
        return cls("polynomial", float(x_lo), float(x_hi), coeffs=c)

    @classmethod
    def free(cls):
        return cls.polynomial([0.0])

    @classmethod
    def harmonic(cls, mass: float, omega0: float):
        return cls.polynomial([0.0, 0.0, 0.5 * mass * omega0**2])

    @classmethod
    def double_well(cls, a: float, b: float):
        """V = a*x**4 - b*x**2."""
        return cls.polynomial([0.0, 0.0, -b, 0.0, a])

    @classmethod
    def tabulated(cls, x_lo: float, x_hi: float, values: Sequence[float]):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size < 9:
            raise ValueError(f"tabulated potential needs >= 9 samples, got {v.size}")
        if not x_hi > x_lo:
            raise ValueError("tabulated potential needs x_hi > x_lo")
        dx = (x_hi - x_lo) / (v.size - 1)
        d1 = np.gradient(v, dx, edge_order=2)
        d2 = _second_difference(v, dx)
        d3 = np.gradient(d2, dx, edge_order=2)
        tables = tuple(tuple(a.tolist()) for a in (v, d1, d2, d3))
        return cls("tabulated", float(x_lo), float(x_hi), samples=tuple(v.tolist()), _tables=tables)

    def derivative(self, x, order: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "polynomial":
            poly = np.polynomial.Polynomial(self.coeffs)
            if order:
                poly = poly.deriv(order)
            return np.asarray(poly(x), dtype=float) + np.zeros_like(x)
        if order > 3:
            raise ValueError("tabulated potentials provide derivatives up to order 3")
        if np.any((x < self.x_lo - 1e-12) | (x > self.x_hi + 1e-12)):
            warnings.warn("evaluating a tabulated potential outside its domain", RuntimeWarning)
        grid = np.linspace(self.x_lo, self.x_hi, len(self.samples))
        return np.interp(x, grid, np.asarray(self._tables[order]))

    def V(self, x):
        return self.derivative(x, 0)

    def dV(self, x):
        return self.derivative(x, 1)

    def d2V(self, x):
        return self.derivative(x, 2)

    def d3V(self, x):
        return self.derivative(x, 3)
