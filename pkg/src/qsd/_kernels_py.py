"""Pure numpy implementations of the hot loops.

Every arithmetic expression here mirrors ``_kernels.pyx`` operation for
operation so that both backends round identically.
"""
import numpy as np


def _flux_divergence(P, d_eff, drift, half_inv_zeta, inv_dx, out):
    pv = P * drift
    g = d_eff * P
    J = (pv[:-1] + pv[1:]) * half_inv_zeta + (g[1:] - g[:-1]) * inv_dx
    out[1:-1] = (J[1:] - J[:-1]) * inv_dx
    out[0] = J[0] * (2.0 * inv_dx)
    out[-1] = -J[-1] * (2.0 * inv_dx)
    return out


def pde_heun_steps(P, d_eff, drift, zeta, dx, dt, nsteps):
    """Advance ``P`` in place by ``nsteps`` SSP-RK2 steps of the flux-form operator.

    Returns the smallest density value seen after any step.
    """
    half_inv_zeta = 0.5 / zeta
    inv_dx = 1.0 / dx
    k = np.empty_like(P)
    P1 = np.empty_like(P)
    pmin = np.inf
    for _ in range(nsteps):
        _flux_divergence(P, d_eff, drift, half_inv_zeta, inv_dx, k)
        np.multiply(k, dt, out=P1)
        np.add(P, P1, out=P1)
        _flux_divergence(P1, d_eff, drift, half_inv_zeta, inv_dx, k)
        # P <- 0.5*P + 0.5*(P1 + dt*k)
        P[:] = 0.5 * P + 0.5 * (P1 + k * dt)
        m = P.min()
        if m < pmin:
            pmin = m
    return float(pmin)


def beta_family_rhs(sigma2, beta_grid, zeta, mass, hbar, omega0, out):
    """Time derivative of every member of the beta-resolved dispersion family."""
    c = hbar * hbar / (4.0 * mass)
    mw2 = mass * omega0 * omega0
    f = c / (sigma2 * sigma2)
    incr = np.empty_like(sigma2)
    incr[0] = beta_grid[0] * f[0]
    incr[1:] = 0.5 * (f[:-1] + f[1:]) * (beta_grid[1:] - beta_grid[:-1])
    integral = np.cumsum(incr)
    two_d = 2.0 / (beta_grid * zeta)
    out[:] = two_d * (1.0 + sigma2 * integral - beta_grid * mw2 * sigma2)
    return out
