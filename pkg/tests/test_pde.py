import numpy as np
import pytest

from qsd.dispersion import equilibrium_dispersion_harmonic
from qsd.model import PhysicalParams, Potential
from qsd.pde import (
    FORMS,
    GridState,
    NegativeDensityError,
    SemiclassicalValidityError,
    build_effective_fields,
    discrete_stationary_state,
    evolve,
    gaussian_state,
    moments,
    stable_dt,
    stationary_solution_oracle,
    trapezoid_weights,
)


def fields_for(V, p, form, state):
    return build_effective_fields(V, p, form, state.x)


def l1(a: GridState, b: GridState) -> float:
    return float(np.dot(a.weights, np.abs(a.P - b.P)))


# -- grid state and moments ---------------------------------------------------------


def test_trapezoid_weights_sum_to_length():
    w = trapezoid_weights(101, 0.1)
    assert w.sum() == pytest.approx(10.0, rel=1e-15)
    assert w[0] == w[-1] == 0.05


def test_grid_state_validation():
    with pytest.raises(ValueError):
        GridState(0, 1, np.ones(32))
    with pytest.raises(ValueError):
        GridState(1, 0, np.ones(64))


def test_moments_examples():
    g = gaussian_state(-10, 10, 1024, 1.0)
    m = moments(g)
    assert m.norm == pytest.approx(1.0, abs=1e-14)
    assert abs(m.mean) <= 1e-12
    assert m.variance == pytest.approx(1.0, abs=1e-6)
    u = GridState(0.0, 1.0, np.ones(1024))
    assert moments(u).variance == pytest.approx(1 / 12, rel=1e-5)


# -- effective fields --------------------------------------------------------------


def test_free_fields_identical_for_both_forms():
    p = PhysicalParams()
    x = np.linspace(-5, 5, 64)
    a, b = (build_effective_fields(Potential.free(), p, f, x) for f in FORMS)
    assert np.all(a.d_eff == p.D) and np.all(a.v_eff_prime == 0)
    assert np.array_equal(a.d_eff, b.d_eff) and np.array_equal(a.v_eff_prime, b.v_eff_prime)


def test_harmonic_fields():
    p = PhysicalParams(mass=2.0, hbar=0.3, omega0=1.5, beta=0.8)
    x = np.linspace(-5, 5, 64)
    f = build_effective_fields(Potential.harmonic(p.mass, p.omega0), p, "ankerhold", x)
    expected = p.D * (1 + p.beta**2 * p.hbar**2 * p.omega0**2 / 12)
    assert np.allclose(f.d_eff, expected, rtol=1e-15)
    assert np.allclose(f.v_eff_prime, p.mass * p.omega0**2 * x, rtol=1e-14, atol=1e-14)


def test_ankerhold_drift_uses_third_derivative():
    p = PhysicalParams(hbar=0.7, beta=1.3, mass=0.9)
    a, b = 0.5, 1.0
    x = np.linspace(-3, 3, 64)
    V = Potential.double_well(a, b)
    cof = build_effective_fields(V, p, "coffey", x)
    ank = build_effective_fields(V, p, "ankerhold", x)
    assert np.allclose(ank.v_eff_prime - cof.v_eff_prime, p.beta * p.hbar**2 * 24 * a * x / (24 * p.mass))
    assert np.array_equal(ank.d_eff, cof.d_eff)
    assert np.argmin(cof.d_eff) in (31, 32)


@pytest.mark.parametrize("hbar, valid", [(1.0, True), (1.7, True), (1.75, False), (2.0, False)])
def test_double_well_validity_flag(hbar, valid):
    # D_eff(0) = D (1 - beta**2 hbar**2 2b/(12 m)); the grid has a node at 0
    p = PhysicalParams(hbar=hbar)
    f = build_effective_fields(Potential.double_well(1.0, 2.0), p, "coffey", np.linspace(-3, 3, 65))
    assert f.valid is valid
    assert (1 - hbar**2 * 4 / 12 > 0) is valid


def test_tabulated_potential_warns_for_ankerhold():
    x = np.linspace(-5, 5, 201)
    V = Potential.tabulated(-5, 5, 0.5 * x**2)
    with pytest.warns(RuntimeWarning):
        f = build_effective_fields(V, PhysicalParams(hbar=0.5), "ankerhold", x)
    assert np.allclose(f.v_eff_prime, x, atol=1e-10)


def test_unknown_form_rejected():
    with pytest.raises(ValueError):
        build_effective_fields(Potential.free(), PhysicalParams(), "wigner", np.zeros(64))


# -- stationary oracles ---------------------------------------------------------------


def test_oracle_free_is_uniform():
    f = build_effective_fields(Potential.free(), PhysicalParams(), "coffey", np.linspace(0, 4, 64))
    s = stationary_solution_oracle(f, PhysicalParams(), 0, 4)
    assert np.allclose(s.P, 0.25, rtol=1e-14)


@pytest.mark.parametrize("form", FORMS)
def test_oracle_harmonic_variance(form):
    p = PhysicalParams(hbar=0.1, omega0=1.0)
    x = np.linspace(-10, 10, 1024)
    f = build_effective_fields(Potential.harmonic(1, 1), p, form, x)
    var = moments(stationary_solution_oracle(f, p, -10, 10)).variance
    assert var == pytest.approx((1 + 0.01 / 12) / (p.beta * p.mass * p.omega0**2), rel=1e-10)


def test_oracle_rejects_invalid_fields():
    p = PhysicalParams(hbar=2.0)
    x = np.linspace(-3, 3, 65)
    f = build_effective_fields(Potential.double_well(1.0, 2.0), p, "coffey", x)
    with pytest.raises(SemiclassicalValidityError):
        stationary_solution_oracle(f, p, -3, 3)
    with pytest.raises(SemiclassicalValidityError):
        discrete_stationary_state(f, p, -3, 3)


def test_discrete_stationary_state_is_a_fixed_point():
    p = PhysicalParams(hbar=0.5)
    s = discrete_stationary_state(
        build_effective_fields(Potential.double_well(0.25, 1.0), p, "ankerhold", np.linspace(-4, 4, 257)),
        p, -4, 4)
    f = fields_for(Potential.double_well(0.25, 1.0), p, "ankerhold", s)
    r = evolve(s, f, p, p.t_cross)
    assert l1(r, s) <= 1e-8


def test_continuum_oracle_drifts_only_at_discretisation_order():
    # evolving the cumulative-trapezoid oracle moves it towards the scheme's own
    # fixed point, which differs from it at O(dx**2)
    p = PhysicalParams(hbar=0.5)
    V = Potential.double_well(0.25, 1.0)
    drift = []
    for n in (257, 513):
        x = np.linspace(-4, 4, n)
        f = build_effective_fields(V, p, "coffey", x)
        o = stationary_solution_oracle(f, p, -4, 4)
        drift.append(l1(o, discrete_stationary_state(f, p, -4, 4)))
    assert drift[1] < 1e-4
    assert 3.4 <= drift[0] / drift[1] <= 4.6


# -- evolution ------------------------------------------------------------------------------


def test_free_variance_follows_einstein_law_and_forms_agree_bitwise():
    p = PhysicalParams()
    s = gaussian_state(-10, 10, 1024, 1.0)
    runs = [evolve(s, fields_for(Potential.free(), p, f, s), p, p.t_cross) for f in FORMS]
    assert np.array_equal(runs[0].P, runs[1].P)
    var = moments(runs[0]).variance
    assert var == pytest.approx(1.0 + 2 * p.D * p.t_cross, rel=5e-3)
    assert abs(runs[0].norm() - 1) <= 1e-10


@pytest.mark.parametrize("form", FORMS)
def test_harmonic_relaxes_to_semiclassical_equilibrium(form):
    p = PhysicalParams(hbar=0.1, omega0=1.0)
    s = gaussian_state(-10, 10, 512, 0.5)
    r = evolve(s, fields_for(Potential.harmonic(1, 1), p, form, s), p, 25.0)
    target = (1 + 0.01 / 12) / (p.beta * p.mass * p.omega0**2)
    assert moments(r).variance == pytest.approx(target, rel=1e-3)
    assert moments(r).variance == pytest.approx(equilibrium_dispersion_harmonic(p), rel=1e-3)
    assert abs(r.norm() - 1) <= 1e-10
    assert r.info["min_P"] >= -1e-8


def test_grid_convergence_is_second_order():
    p = PhysicalParams(hbar=0.5)
    V = Potential.double_well(0.25, 1.0)
    nref = 2**14 + 1
    ref = stationary_solution_oracle(build_effective_fields(V, p, "ankerhold", np.linspace(-4, 4, nref)), p, -4, 4)
    errs = []
    for n in (257, 513):
        s = gaussian_state(-4, 4, n, 0.5)
        r = evolve(s, fields_for(V, p, "ankerhold", s), p, 30.0)
        sub = GridState(-4, 4, ref.P[:: (nref - 1) // (n - 1)])
        errs.append(l1(r, sub))
        assert abs(r.norm() - 1) <= 1e-10
    assert 3.4 <= errs[0] / errs[1] <= 4.6


def test_invalid_fields_raise_or_clamp():
    p = PhysicalParams(hbar=2.0)
    s = gaussian_state(-3, 3, 65, 0.3)
    f = fields_for(Potential.double_well(1.0, 2.0), p, "coffey", s)
    with pytest.raises(SemiclassicalValidityError, match="semiclassical validity violated"):
        evolve(s, f, p, 0.01)
    r = evolve(s, f, p, 0.01, override=True)
    assert r.info["clamped"] is True
    assert np.min(f.clamped(p.D).d_eff) == pytest.approx(1e-3 * p.D)


def test_negative_density_detected():
    # cell Peclet number above 2 makes the central scheme oscillate
    p = PhysicalParams(hbar=0.0)
    s = gaussian_state(-1, 1, 64, 0.09)
    with pytest.raises(NegativeDensityError):
        evolve(s, fields_for(Potential.polynomial([0, 0, 50.0]), p, "coffey", s), p, 1.0)


def test_step_policy_and_info():
    p = PhysicalParams(omega0=1.0)
    s = gaussian_state(-8, 8, 128, 1.0)
    f = fields_for(Potential.harmonic(1, 1), p, "coffey", s)
    bound = stable_dt(f, p, s.dx)
    assert bound == pytest.approx(min(0.4 * s.dx**2 / f.d_eff.max(), 0.4 * s.dx / 8.0))
    r = evolve(s, f, p, 0.3, dt=bound / 3)
    assert r.t == 0.3
    assert r.info["dt"] <= bound / 3
    assert r.info["steps"] * r.info["dt"] == pytest.approx(0.3, rel=1e-12)
    assert r.info["form"] == "coffey" and r.info["clamped"] is False
    assert s.t == 0.0 and "steps" not in s.info
    with pytest.raises(ValueError):
        evolve(r, f, p, 0.1)


def test_chunked_and_split_runs_agree():
    p = PhysicalParams(omega0=1.0)
    s = gaussian_state(-8, 8, 128, 1.0)
    f = fields_for(Potential.harmonic(1, 1), p, "coffey", s)
    dt = stable_dt(f, p, s.dx)
    one = evolve(s, f, p, 200 * dt, chunk=7)
    two = evolve(evolve(s, f, p, 100 * dt), f, p, 200 * dt)
    assert np.array_equal(one.P, evolve(s, f, p, 200 * dt).P)
    assert np.allclose(one.P, two.P, rtol=1e-12, atol=1e-15)
    assert two.info["steps"] == 200


def _stationary_variance(V, p, form, half_width=6.0, n=2049, solver=discrete_stationary_state):
    x = np.linspace(-half_width, half_width, n)
    f = build_effective_fields(V, p, form, x)
    return moments(solver(f, p, -half_width, half_width)).variance


def test_forms_coincide_for_harmonic_and_miss_coth_at_fourth_order():
    # V''' = 0 and V'' is constant, so the extra ankerhold drift vanishes; the
    # trapezoid oracle is exact for a linear drift, keeping grid error out of the gap
    V = Potential.harmonic(1.0, 1.0)
    gaps = []
    for hbar in (0.1, 0.2):
        p = PhysicalParams(hbar=hbar, omega0=1.0)
        cof, ank = (_stationary_variance(V, p, f, 10.0, 1024, stationary_solution_oracle) for f in FORMS)
        assert cof == ank
        gaps.append(equilibrium_dispersion_harmonic(p) - cof)
    assert 12 <= gaps[1] / gaps[0] <= 20


def test_forms_differ_at_second_order_for_anharmonic_wells():
    V = Potential.polynomial([0, 0, 0.5, 0, 0.25])
    diffs = []
    for hbar in (0.1, 0.2):
        p = PhysicalParams(hbar=hbar)
        cof, ank = (_stationary_variance(V, p, f) for f in FORMS)
        diffs.append(abs(ank - cof))
    assert 3.4 <= diffs[1] / diffs[0] <= 4.6
