import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsd.analysis import (
    compare_trajectories,
    crossover_scales,
    early_exponent,
    local_exponent,
    log_derivative,
)
from qsd.dispersion import (
    DispersionTrajectory,
    constant_sigma_fixed_point,
    rhs_constant_sigma,
    solve_free_closed_form,
    trajectory,
)
from qsd.model import ArrheniusModel, PhysicalParams

FREE = PhysicalParams()


def test_log_derivative_exact_for_power_laws_on_uneven_grids():
    rng = np.random.default_rng(7)
    t = np.sort(rng.uniform(0.01, 100.0, 40))
    for k in (0.5, 1.0, 2.3):
        assert np.allclose(log_derivative(t, 3.0 * t**k), k, atol=1e-10)


def test_log_derivative_exact_for_log_quadratics():
    t = np.geomspace(0.1, 10, 9) * np.linspace(1, 1.3, 9)
    u = np.log(t)
    y = np.exp(0.2 + 0.7 * u - 0.05 * u**2)
    assert np.allclose(log_derivative(t, y), (0.7 - 0.1 * u)[1:-1], atol=1e-11)


def test_log_derivative_rejects_bad_input():
    with pytest.raises(ValueError):
        log_derivative([1, 2], [1, 2])
    with pytest.raises(ValueError):
        log_derivative([0, 1, 2], [1, 2, 3])


def test_local_exponent_examples():
    t = np.geomspace(1, 100, 10)
    e = local_exponent(DispersionTrajectory(t, 2 * FREE.D * t, "relaxed"))
    assert np.allclose(e.alpha, 0.5, atol=1e-12)
    assert e.times.size == 8
    s = 2 * FREE.lambda_T * np.sqrt(FREE.D * t)
    assert np.allclose(local_exponent(DispersionTrajectory(t, s, "early_power")).alpha, 0.25, atol=1e-12)


def test_closed_form_exponent_limits():
    tc = FREE.t_cross
    for point, target in ((1e-6, 0.25), (1e6, 0.5)):
        t = point * tc * np.array([0.99, 1.0, 1.01])
        alpha = local_exponent(trajectory("closed_form", t, FREE)).alpha[0]
        assert abs(alpha - target) <= 5e-3


def test_early_exponent():
    t = np.array([0.0, 1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3, 1.0])
    assert early_exponent(t, 5 * t**0.5) == pytest.approx(0.25, abs=1e-12)
    assert np.isnan(early_exponent([0.0, 1.0], [0.0, 1.0]))


def test_crossover_scales():
    p = PhysicalParams(mass=2.0, beta=0.5, hbar=0.4, zeta=3.0)
    c = crossover_scales(p)
    assert c.t_cross == pytest.approx(p.hbar**2 * p.zeta * p.beta**2 / (8 * p.mass), rel=1e-15)
    assert c.lambda_E is None
    # at 10 lambda_T**2 the constant-sigma rate exceeds 2D by 10%
    assert rhs_constant_sigma(c.sigma2_quantum_10pct, p) == pytest.approx(2.2 * p.D, rel=1e-14)
    a = ArrheniusModel(1.0, 0.25)
    assert crossover_scales(p, a).lambda_E == pytest.approx(p.hbar / (2 * np.sqrt(p.mass * 0.25)))


def test_crossover_time_splits_regimes():
    tc = FREE.t_cross
    s = solve_free_closed_form(np.array([1e-3, 1e3]) * tc, FREE)
    classical = 2 * FREE.D * np.array([1e-3, 1e3]) * tc
    assert s[0] / classical[0] > 10
    assert s[1] / classical[1] < 1.01


def test_compare_identical_grids():
    t = np.linspace(0, 1, 5)
    a = DispersionTrajectory(t, 1 + t, "relaxed")
    b = DispersionTrajectory(t, (1 + t) * 1.01, "relaxed")
    err = compare_trajectories(a, b)
    assert not err.resampled
    assert err.max_rel_err == pytest.approx(0.01 / 1.01)
    assert err.max_abs_err == pytest.approx(0.02)
    assert compare_trajectories(a, a).max_rel_err == 0.0


def test_compare_resamples_power_laws_exactly():
    ta = np.geomspace(1e-3, 1, 17)
    tb = np.geomspace(1e-4, 10, 50)
    a = DispersionTrajectory(ta, ta**0.5, "early_power")
    b = DispersionTrajectory(tb, tb**0.5, "early_power")
    err = compare_trajectories(a, b)
    assert err.resampled
    assert err.max_rel_err <= 1e-12


def test_compare_rejects_disjoint_grids():
    a = DispersionTrajectory([1.0, 2.0], [1.0, 2.0], "relaxed")
    b = DispersionTrajectory([5.0, 6.0], [1.0, 2.0], "relaxed")
    with pytest.raises(ValueError):
        compare_trajectories(a, b)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0), st.floats(0.0, 5.0))
def test_constant_sigma_fixed_point_solves_its_quadratic(beta, mass, hbar):
    p = PhysicalParams(beta=beta, mass=mass, hbar=hbar, omega0=1.3)
    root = constant_sigma_fixed_point(p)
    assert root > 0
    assert abs(rhs_constant_sigma(root, p)) <= 1e-12 * 2 * p.D
