import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference, reference_strip
from gpcurve import ansatz as an
from gpcurve import diagnostics as dg
from gpcurve import oracle as orc
from gpcurve.errors import NoAdmissibleEpsilon, OutsideTube
from gpcurve.geometry import Circle, Ellipse, ExpressionPotential, TubeGeometry, gaussian_ring
from gpcurve.numerics import simpson_weights
from gpcurve.stability import check_gap_a, check_gap_epsilon, lambda_star

LAM = lambda_star(3.0)


@pytest.fixture(scope="module")
def oracle_005():
    sc = reference(0.05)
    return sc, orc.solve_radial_for_scenario(sc)


def test_identities_hold_on_oracle_solution(oracle_005):
    sc, radial = oracle_005
    g = sc.geometry()
    t, u, ut, w = orc.fermi_samples(radial, sc.curve.radius, 0.9 * g.M0)
    s = dg.pohozaev_summary(dg.pohozaev_residuals(g, t, u, ut, w))
    assert max(s["identity1"], s["identity2"], s["identity3"]) < 1e-5
    assert s["consistency"] < 1e-12


def test_identities_fail_on_a_non_solution():
    g = reference(0.05).geometry()
    eps = 0.05
    n = 401
    t = np.linspace(-0.3, 0.3, n)
    u = np.repeat(np.exp(-t**2 / eps)[:, None], 8, axis=1)
    ut = np.repeat((-2 * t / eps * np.exp(-t**2 / eps))[:, None], 8, axis=1)
    s = dg.pohozaev_summary(dg.pohozaev_residuals(g, t, u, ut, simpson_weights(n, t[1] - t[0])))
    assert s["identity1"] > 1e-2 * s["scale"]
    # the third identity is always the combination 2κ·first − second, even off-solution
    assert s["consistency"] < 1e-10


def test_identity_window_must_fit_in_tube():
    g = reference(0.05).geometry()
    t = np.linspace(-2 * g.M0, 2 * g.M0, 11)
    u = np.ones((11, 4))
    with pytest.raises(OutsideTube):
        dg.pohozaev_residuals(g, t, u, u, simpson_weights(11, t[1] - t[0]))


def _ellipse(eps):
    return TubeGeometry(Ellipse(3.0, 2.0), ExpressionPotential("0.2*x**2 + 0.1*x*y"), eps, n_quad=256)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 0.3))
def test_cubic_and_general_conditions_agree(eps):
    g = _ellipse(eps)
    a = dg.necessary_condition_residual(g, p=3)
    b = dg.necessary_condition_residual(g, p=3, form="general")
    assert np.max(np.abs(a - b)) < 1e-12


def test_condition_rejects_bad_exponent():
    g = _ellipse(0.1)
    with pytest.raises(ValueError):
        dg.necessary_condition_residual(g, p=1)
    with pytest.raises(ValueError):
        dg.necessary_condition_residual(g, p=5, form="cubic")


def test_condition_vanishes_on_stationary_ring():
    g = reference(0.05).geometry()
    assert np.max(np.abs(dg.necessary_condition_residual(g))) < 1e-12


def test_weighted_condition_values(constants):
    g = reference(0.05).geometry()
    vals = dg.weighted_condition(g, constants)
    # the two terms are each O(30); the profile constants carry ~1e-9 quadrature error
    assert max(abs(v) for v in vals.values()) < 1e-6
    # off a stationary radius the constant test function gives (4/3)∫β(κβ² + (3/2)ε²W_t)
    off = TubeGeometry(Circle(4.8), g.potential, 0.05)
    tr = off.nodes
    expect = 4.0 / 3.0 * np.sum(tr.beta * (tr.kappa * tr.beta**2 + 1.5 * off.eps2 * tr.Wt)) * off.length / tr.kappa.size
    assert dg.weighted_condition(off, constants)["1"] == pytest.approx(expect, rel=1e-7)
    with pytest.raises(ValueError):
        dg.weighted_condition(g, constants, p=5)


def test_mass_of_leading_field():
    strip = reference_strip(0.05)
    fld = an.build_ansatz(strip, strip.profile.basis, an.ModulationPair(strip))
    mass, tail = dg.mass_of_strip_field(strip, fld.w2)
    lead = 0.05 * 4.0 * strip.ell_tilde
    assert abs(mass - lead) / lead < 0.02
    assert tail < 1e-8
    assert dg.mass_of_solution(fld) == pytest.approx(mass)


def test_mass_of_radial_solution(oracle_005):
    sc, radial = oracle_005
    assert dg.mass_of_solution(radial) == radial.mass
    g = sc.geometry()
    t, u, _, w = orc.fermi_samples(radial, sc.curve.radius, 0.9 * g.M0)
    # the Fermi-coordinate mass of the same field matches the planar quadrature
    assert dg.mass_of_solution((t, w, u), geometry=g) == pytest.approx(radial.mass, rel=1e-6)


@pytest.mark.parametrize("lt", [5.0, 34.9087812203, 120.0])
def test_fit_epsilon_round_trip(lt):
    a = 4.0 * lt / 0.05
    fit = dg.fit_epsilon(a, lambda e: lt, 3.0)
    assert abs(fit.a * fit.epsilon / fit.ell_tilde - 4.0) < 1e-10
    assert fit.gap_a.passed and fit.gap_epsilon.passed


def test_fit_epsilon_shifts_out_of_forbidden_band():
    lt = 20.0
    # the j = 20 resonant ε, then a from the identity
    eps = np.sqrt(LAM) * lt / 20
    fit = dg.fit_epsilon(4.0 * lt / eps, lambda e: lt, 3.0)
    assert fit.shifted and fit.epsilon_root == pytest.approx(eps, rel=1e-12)
    assert check_gap_epsilon(fit.epsilon, lt, LAM, 0.01).passed
    assert check_gap_a(4.0 * lt / fit.epsilon, 0.01, 4.0, LAM).passed
    assert fit.as_dict()["shifted"] is True


def test_fit_epsilon_failures():
    with pytest.raises(NoAdmissibleEpsilon):
        dg.fit_epsilon(1.0, lambda e: 10.0, 3.0)
    with pytest.raises(ValueError):
        dg.fit_epsilon(-1.0, lambda e: 10.0, 3.0)


def test_fit_epsilon_with_varying_length():
    pot = gaussian_ring(2.0, 4.0, 0.7)

    def ell_of(eps):
        return TubeGeometry(Circle(5.5), pot, eps, n_quad=128).ell_tilde

    fit = dg.fit_epsilon(600.0, ell_of, 3.0)
    assert abs(fit.a * fit.epsilon / ell_of(fit.epsilon) - 4.0) < 1e-10 or fit.shifted
