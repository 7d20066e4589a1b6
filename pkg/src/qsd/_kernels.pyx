# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled counterparts of ``_kernels_py``; same signatures, same rounding."""
import numpy as np


cdef void _flux_divergence(const double[::1] P, const double[::1] d_eff,
                           const double[::1] drift, double half_inv_zeta,
                           double inv_dx, double[::1] J, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = P.shape[0]
    cdef Py_ssize_t i
    for i in range(n - 1):
        J[i] = (P[i] * drift[i] + P[i + 1] * drift[i + 1]) * half_inv_zeta \
            + (d_eff[i + 1] * P[i + 1] - d_eff[i] * P[i]) * inv_dx
    out[0] = J[0] * (2.0 * inv_dx)
    for i in range(1, n - 1):
        out[i] = (J[i] - J[i - 1]) * inv_dx
    out[n - 1] = -J[n - 2] * (2.0 * inv_dx)


def pde_heun_steps(double[::1] P, const double[::1] d_eff, const double[::1] drift,
                   double zeta, double dx, double dt, long nsteps):
    cdef Py_ssize_t n = P.shape[0]
    cdef double half_inv_zeta = 0.5 / zeta
    cdef double inv_dx = 1.0 / dx
    cdef double[::1] k = np.empty(n)
    cdef double[::1] P1 = np.empty(n)
    cdef double[::1] J = np.empty(n - 1)
    cdef double pmin = np.inf
    cdef double m
    cdef long step
    cdef Py_ssize_t i
    with nogil:
        for step in range(nsteps):
            _flux_divergence(P, d_eff, drift, half_inv_zeta, inv_dx, J, k)
            for i in range(n):
                P1[i] = P[i] + k[i] * dt
            _flux_divergence(P1, d_eff, drift, half_inv_zeta, inv_dx, J, k)
            m = P[0]
            for i in range(n):
                P[i] = 0.5 * P[i] + 0.5 * (P1[i] + k[i] * dt)
                if P[i] < m:
                    m = P[i]
            if m < pmin:
                pmin = m
    return pmin


def beta_family_rhs(const double[::1] sigma2, const double[::1] beta_grid, double zeta,
                    double mass, double hbar, double omega0, double[::1] out):
    cdef Py_ssize_t n = sigma2.shape[0]
    cdef double c = hbar * hbar / (4.0 * mass)
    cdef double mw2 = mass * omega0 * omega0
    cdef double f_prev, f, integral
    cdef Py_ssize_t j
    with nogil:
        f_prev = c / (sigma2[0] * sigma2[0])
        integral = beta_grid[0] * f_prev
        out[0] = (2.0 / (beta_grid[0] * zeta)) * (1.0 + sigma2[0] * integral
                                                  - beta_grid[0] * mw2 * sigma2[0])
        for j in range(1, n):
            f = c / (sigma2[j] * sigma2[j])
            integral = integral + 0.5 * (f_prev + f) * (beta_grid[j] - beta_grid[j - 1])
            out[j] = (2.0 / (beta_grid[j] * zeta)) * (1.0 + sigma2[j] * integral
                                                      - beta_grid[j] * mw2 * sigma2[j])
            f_prev = f
    return np.asarray(out)
