import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ellipe

from gpcurve.errors import ConfigError, OutsideTube
from gpcurve.geometry import (
    Circle,
    Ellipse,
    ExpressionPotential,
    FourierCurve,
    ScaleParams,
    TubeGeometry,
    constant_potential,
    gaussian_ring,
)
from gpcurve.numerics import periodic_derivative

WAVY = "0.3*x**2 + 0.1*y**3 + sin(x*y)"


@pytest.fixture(scope="module")
def ellipse_tube():
    return TubeGeometry(Ellipse(3.0, 2.0), ExpressionPotential(WAVY), 0.3)


@pytest.fixture(scope="module")
def circle_tube():
    return TubeGeometry(Circle(2.5, (0.3, -0.2)), gaussian_ring(1.0, 2.0, 0.8, (0.3, -0.2)), 0.2)


def test_circle_frame():
    c = Circle(2.0)
    fr = c.frame(np.array([0.0, 2.0 * np.pi]))
    assert np.allclose(fr.point, [[2.0, 0.0], [-2.0, 0.0]])
    assert np.allclose(fr.normal, [[1.0, 0.0], [-1.0, 0.0]])
    assert np.allclose(fr.kappa, 0.5)


def test_ellipse_perimeter_and_curvature():
    a, b = 3.0, 2.0
    e = Ellipse(a, b)
    assert e.length == pytest.approx(4 * a * ellipe(1 - b**2 / a**2), rel=1e-12)
    theta = np.linspace(0.0, e.length, 40, endpoint=False)
    phi = e.parameter(theta)
    exact = a * b / (a**2 * np.sin(phi) ** 2 + b**2 * np.cos(phi) ** 2) ** 1.5
    assert np.max(np.abs(e.curvature(theta) - exact)) < 1e-10


@pytest.mark.parametrize("curve", [Circle(1.7), Ellipse(3.0, 2.0), Ellipse(1.0, 4.0)])
def test_total_curvature(curve):
    assert curve.turning() == pytest.approx(2 * np.pi, abs=1e-6)


def test_fourier_curve_of_circle_samples():
    s = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    fc = FourierCurve(np.column_stack([2.0 * np.cos(s), 2.0 * np.sin(s)]))
    assert fc.length == pytest.approx(4 * np.pi, rel=1e-12)
    assert np.max(np.abs(fc.curvature(np.linspace(0, fc.length, 17)) - 0.5)) < 1e-10
    assert fc.turning() == pytest.approx(2 * np.pi, abs=1e-6)


def test_fourier_curve_reorients_clockwise_samples():
    s = np.linspace(0, 2 * np.pi, 32, endpoint=False)[::-1]
    fc = FourierCurve(np.column_stack([np.cos(s), 2.0 * np.sin(s)]))
    assert fc.turning() == pytest.approx(2 * np.pi, abs=1e-6)


def test_fermi_round_trip_on_seeded_samples(ellipse_tube, rng):
    g = ellipse_tube
    t = rng.uniform(-0.9, 0.9, 1000) * g.M0
    theta = rng.uniform(0.0, g.length, 1000)
    t2, theta2 = g.fermi_unmap(g.fermi_map(t, theta))
    dtheta = np.mod(theta2 - theta + 0.5 * g.length, g.length) - 0.5 * g.length
    assert np.max(np.abs(t2 - t)) < 1e-10
    assert np.max(np.abs(dtheta)) < 1e-10


def test_fermi_unmap_rejects_points_outside_tube(ellipse_tube):
    g = ellipse_tube
    far = g.fermi_map(np.array([0.99 * g.M0 + 0.5]), np.array([1.0]))
    with pytest.raises(OutsideTube):
        g.fermi_unmap(far)


def test_liouville_endpoints(ellipse_tube):
    g = ellipse_tube
    assert g.liouville(0.0) == 0.0
    assert g.liouville(g.length) == pytest.approx(2 * np.pi, abs=1e-13)
    assert g.liouville_inverse(0.0) == 0.0
    assert g.liouville_inverse(2 * np.pi) == pytest.approx(g.length, abs=1e-12)


def test_liouville_is_increasing(ellipse_tube):
    tau = ellipse_tube.liouville(np.linspace(0, ellipse_tube.length, 500))
    assert np.all(np.diff(tau) > 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 2 * np.pi - 1e-9))
def test_liouville_round_trip(tau):
    g = _ELLIPSE_TUBE
    assert float(g.liouville(g.liouville_inverse(tau))) == pytest.approx(tau, abs=1e-11)


def test_weighted_length_of_constant_potential():
    g = TubeGeometry(Circle(2.0), constant_potential(3.0), 0.1)
    assert g.ell_tilde == pytest.approx(np.sqrt(1.03) * 4 * np.pi, rel=1e-14)


def test_beta_derivatives_against_spectral_differences(ellipse_tube):
    g = ellipse_tube
    tr = g.nodes
    L = g.length
    for k, exact in ((1, tr.beta1), (2, tr.beta2), (3, tr.beta3)):
        fd = periodic_derivative(tr.beta, L, order=k)
        assert np.max(np.abs(fd - exact)) < 1e-6


def test_tangential_potential_derivatives(ellipse_tube):
    g = ellipse_tube
    tr = g.nodes
    L = g.length
    assert np.max(np.abs(periodic_derivative(tr.W0, L) - tr.Wth)) < 1e-7
    assert np.max(np.abs(periodic_derivative(tr.W0, L, order=2) - tr.Wthth)) < 1e-6


def test_normal_potential_derivatives(ellipse_tube):
    g = ellipse_tube
    theta = np.linspace(0, g.length, 11, endpoint=False)
    h = 1e-4
    tr = g.traces(theta)
    up, _ = g.potential_along_normals(h, theta)
    dn, _ = g.potential_along_normals(-h, theta)
    mid, wt = g.potential_along_normals(0.0, theta)
    assert np.max(np.abs((up - dn) / (2 * h) - tr.Wt)) < 1e-6
    assert np.max(np.abs((up - 2 * mid + dn) / h**2 - tr.Wtt)) < 1e-4
    assert np.max(np.abs(wt - tr.Wt)) < 1e-12


def test_radial_potential_normal_derivative_is_radial(circle_tube):
    g = circle_tube
    tr = g.nodes
    pot = g.potential
    assert np.max(np.abs(tr.Wt - pot.of_r(2.5, 1))) < 1e-10
    assert np.max(np.abs(tr.Wtt - pot.of_r(2.5, 2))) < 1e-10
    assert np.max(np.abs(tr.Wth)) < 1e-10


def test_scaled_potential_shares_derivatives():
    a = gaussian_ring(2.0, 4.0, 0.7)
    b = gaussian_ring(2.0, 4.0, 0.7, scale=400.0)
    r = np.linspace(3.0, 5.0, 9)
    assert np.allclose(400.0 * a.of_r(r, 2), b.of_r(r, 2), rtol=1e-14)
    assert a._funcs is b._funcs


def test_scale_params_validation():
    ScaleParams(0.05)
    with pytest.raises(ConfigError):
        ScaleParams(0.05, varrho=0.5)
    with pytest.raises(ConfigError):
        ScaleParams(-1.0)
    assert ScaleParams(0.05).budget_f == pytest.approx(0.05**0.8)


_ELLIPSE_TUBE = TubeGeometry(Ellipse(3.0, 2.0), ExpressionPotential(WAVY), 0.3)
