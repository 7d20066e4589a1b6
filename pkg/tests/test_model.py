import math

import numpy as np
import pytest

from qsd.model import (
    ArrheniusModel,
    PhysicalParams,
    Potential,
    arrhenius_diffusion,
    dbeta_beta_zeta,
    derived_scales,
)


def test_classical_limit_scales():
    s = derived_scales(PhysicalParams(hbar=0.0))
    assert s.lambda_T == 0.0 and s.t_cross == 0.0
    assert s.D == 1.0


def test_unit_cancellation_case():
    s = derived_scales(PhysicalParams(mass=1, zeta=1, beta=1, hbar=2))
    assert s == (1.0, 1.0, 0.5)


def test_mixed_case():
    s = derived_scales(PhysicalParams(mass=1, zeta=2, beta=0.5, hbar=1))
    assert s.D == 1.0
    # lambda_T = hbar/(2 sqrt(m k_B T)) with k_B T = 1/beta
    assert s.lambda_T == pytest.approx(1.0 / (2 * math.sqrt(1.0 / 0.5)), rel=1e-15)
    assert s.lambda_T == pytest.approx(0.35355339059327373, rel=1e-15)


def test_doubling_hbar_quadruples_lambda2_and_t_cross():
    p = PhysicalParams(mass=0.7, zeta=1.3, beta=2.1, hbar=0.37)
    q = p.replace(hbar=2 * p.hbar)
    assert q.lambda_T**2 == 4 * p.lambda_T**2
    assert q.t_cross == 4 * p.t_cross


@pytest.mark.parametrize("field,value", [("mass", 0.0), ("zeta", -1.0), ("beta", 0.0),
                                         ("hbar", -1e-3), ("omega0", -1.0), ("mass", math.inf)])
def test_invalid_params_name_the_field(field, value):
    with pytest.raises(ValueError, match=field):
        PhysicalParams(**{field: value})


def test_arrhenius_example():
    p = PhysicalParams()
    r = arrhenius_diffusion(ArrheniusModel(1.0, 1.0), 1.0, p)
    assert r.D == pytest.approx(math.exp(-1), rel=1e-15)
    assert r.dbeta_beta_zeta == pytest.approx(math.e, rel=1e-15)
    assert r.zeta == pytest.approx(math.e, rel=1e-15)
    assert r.lambda_E == pytest.approx(0.5, rel=1e-15)


def test_arrhenius_no_barrier_limit():
    r = arrhenius_diffusion(ArrheniusModel(2.0, 1e-12), 1.0, PhysicalParams())
    assert r.D == pytest.approx(2.0, rel=1e-11)
    assert r.dbeta_beta_zeta == pytest.approx(0.0, abs=1e-11)


def test_arrhenius_derivative_matches_finite_difference():
    a = ArrheniusModel(1.7, 2.0)
    p = PhysicalParams()
    for beta in np.linspace(0.1, 10.0, 25):
        h = 1e-6 * beta
        bz = lambda b: b * arrhenius_diffusion(a, b, p).zeta  # noqa: E731
        fd = (bz(beta + h) - bz(beta - h)) / (2 * h)
        assert arrhenius_diffusion(a, beta, p).dbeta_beta_zeta == pytest.approx(fd, rel=1e-6)


def test_arrhenius_diffusion_decreases_in_beta():
    a = ArrheniusModel(1.0, 0.5)
    d = [a.diffusion(b) for b in np.linspace(0.1, 5, 50)]
    assert np.all(np.diff(d) < 0)


def test_arrhenius_overflow_guard():
    with pytest.raises(OverflowError):
        arrhenius_diffusion(ArrheniusModel(1.0, 1.0), 701.0, PhysicalParams())


def test_dbeta_beta_zeta_paths():
    p = PhysicalParams(zeta=3.0)
    assert dbeta_beta_zeta(p) == 3.0
    a = ArrheniusModel(1.0, 2.0)
    assert dbeta_beta_zeta(p, a) == pytest.approx(2.0 / math.exp(-2.0))


def test_harmonic_curvature_exact():
    V = Potential.harmonic(2.0, 1.5)
    x = np.linspace(-5, 5, 11)
    assert np.all(V.d2V(x) == 2.0 * 1.5**2)
    assert np.all(V.d3V(x) == 0.0)
    assert np.allclose(V.dV(x), 2.0 * 1.5**2 * x)


def test_double_well_derivatives():
    V = Potential.double_well(a=0.5, b=2.0)
    x = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(V.V(x), 0.5 * x**4 - 2 * x**2)
    assert np.allclose(V.d2V(x), 6 * x**2 - 4)
    assert np.allclose(V.d3V(x), 12 * x)


def test_polynomial_degree_limit():
    with pytest.raises(ValueError):
        Potential.polynomial(np.ones(10))


def test_tabulated_needs_nine_samples():
    with pytest.raises(ValueError):
        Potential.tabulated(0, 1, np.zeros(8))


def test_tabulated_second_derivative_is_second_order():
    coeffs = [0.3, -0.2, 0.5, 0.1, -0.05]
    exact = Potential.polynomial(coeffs)
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(-2, 2, n)
        tab = Potential.tabulated(-2, 2, exact.V(x))
        errs.append(np.max(np.abs(tab.d2V(x) - exact.d2V(x))))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.4 < r < 4.6 for r in ratios), ratios


def test_tabulated_quadratic_is_exact():
    x = np.linspace(-3, 3, 31)
    tab = Potential.tabulated(-3, 3, 0.5 * x**2)
    assert np.allclose(tab.d2V(x), 1.0, atol=1e-10)
    assert np.allclose(tab.dV(x), x, atol=1e-10)
