import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpcurve.errors import Unsolvable
from gpcurve.profile import (
    PRINTED_LAMBDA0,
    Grid1D,
    compute_profile,
    lambda0_report,
    linearization_spectrum,
    solve_projected_line,
)

mp.mp.dps = 30


def sech_integral(fn):
    """High-precision ∫ fn(x) dx over the line, for the closed-form profile oracle."""
    return float(mp.quad(fn, [-mp.inf, 0, mp.inf]))


def u_exact(x):
    return mp.sqrt(2) * mp.sech(x)


def du_exact(x):
    return -mp.sqrt(2) * mp.sech(x) * mp.tanh(x)


def d2u_exact(x):
    return mp.sqrt(2) * (mp.sech(x) - 2 * mp.sech(x) ** 3)


UP4 = sech_integral(lambda x: u_exact(x) ** 4)


def z_exact(x):
    return u_exact(x) ** 2 / mp.sqrt(UP4)


def test_profile_matches_sech(profile):
    exact = np.sqrt(2.0) / np.cosh(profile.x)
    assert np.max(np.abs(profile.U - exact)) < 1e-6
    assert profile.residual() < 1e-9


def test_profile_is_even_and_positive(profile):
    core = profile.U[1:-1]
    assert np.all(core > 0)
    assert np.max(np.abs(profile.U - profile.U[::-1])) < 1e-12


@pytest.mark.parametrize(
    "name, integrand",
    [
        ("rho0", lambda x: u_exact(x) ** 2),
        ("rho1", lambda x: du_exact(x) ** 2),
        ("rho2", lambda x: (x * du_exact(x)) ** 2),
        ("rho3", lambda x: (x * d2u_exact(x)) ** 2),
        ("rho4", lambda x: (x**2 * d2u_exact(x)) ** 2),
        ("rho_p", lambda x: u_exact(x) ** 4),
        ("d3", lambda x: x**3 * u_exact(x) * du_exact(x)),
        ("d4", lambda x: x**2 * du_exact(x) ** 2),
        ("d5", lambda x: x**3 * d2u_exact(x) * du_exact(x)),
        ("b0", lambda x: z_exact(x) ** 2),
        ("b1", lambda x: u_exact(x) * z_exact(x) ** 3),
        ("b2", lambda x: z_exact(x) ** 4),
        ("b4", lambda x: x * du_exact(x) * z_exact(x)),
        ("b5", lambda x: u_exact(x) * z_exact(x)),
        ("b6", lambda x: d2u_exact(x) * z_exact(x)),
    ],
)
def test_constants_against_high_precision_quadrature(constants, name, integrand):
    assert getattr(constants, name) == pytest.approx(sech_integral(integrand), abs=1e-6)


def test_d8_against_quadrature(constants):
    def dz(x):
        return 2 * u_exact(x) * du_exact(x) / mp.sqrt(UP4)

    assert constants.d8 == pytest.approx(sech_integral(lambda x: dz(x) * du_exact(x)), abs=1e-6)


def test_b3_uses_closed_form_second_correction(constants):
    closed = sech_integral(lambda x: -0.5 * (u_exact(x) + x * du_exact(x)) * z_exact(x))
    assert constants.b3 == pytest.approx(closed, abs=1e-6)


def test_leading_eigenpair_is_poschl_teller(profile):
    # ∂² − 1 + 6 sech² has bound states 3 and 0 with eigenfunctions sech² and sech·tanh
    (lam0, z), (lam1, v) = linearization_spectrum(profile, 2)
    assert lam0 == pytest.approx(3.0, abs=1e-3)
    assert abs(lam1) < 1e-6
    assert np.max(np.abs(z - profile.Z)) < 1e-6
    tanh_mode = np.sinh(profile.x) / np.cosh(profile.x) ** 2
    tanh_mode /= np.sqrt(profile.integrate(tanh_mode**2))
    assert np.max(np.abs(np.abs(v) - np.abs(tanh_mode))) < 1e-5


def test_printed_lambda0_flagged(profile):
    rep = lambda0_report(profile)
    assert rep["printed"] == PRINTED_LAMBDA0 == 4.0
    assert rep["consistent"] is False
    assert rep["computed"] == pytest.approx(3.0, abs=1e-6)


def test_correction_closed_form(profile, basis):
    closed = -0.5 * (profile.U + profile.x * profile.dU)
    assert np.max(np.abs(basis[2] - closed)) < 1e-6


def test_correction_residuals_and_parity(basis):
    assert max(basis.residuals().values()) < 1e-8
    for k, (parity, asym) in basis.parity().items():
        assert parity == ("odd" if k == 1 else "even")
        assert asym < 1e-9


def test_corrections_orthogonal_to_translation(profile, basis):
    for k in range(1, 9):
        assert abs(profile.integrate(basis[k] * profile.dU)) < 1e-9


def test_first_order_error_has_no_translation_component(profile):
    s1 = profile.dU + (2.0 / 3.0) * profile.x * profile.U
    assert abs(profile.integrate(s1 * profile.dU)) < 1e-8


def test_projected_solve_rejects_translation_forcing(profile):
    with pytest.raises(Unsolvable):
        solve_projected_line(profile, profile.dU, project_out=("Z",))


def test_projected_solve_returns_multipliers(profile):
    rhs = np.exp(-profile.x**2)
    phi, mult = solve_projected_line(profile, rhs, project_out=("dU", "Z"), return_multipliers=True)
    r = profile.apply_L(phi) + rhs - mult["dU"] * profile.dU - mult["Z"] * profile.Z
    assert np.max(np.abs(r[1:-1])) < 1e-9
    assert abs(profile.integrate(phi * profile.Z)) < 1e-10
    # an even right-hand side has no U' component
    assert abs(mult["dU"]) < 1e-10


def test_grid_refinement_is_fourth_order():
    errs = []
    for n in (801, 1601):
        p = compute_profile(Grid1D(20.0, n))
        errs.append(abs(p.integrate(p.dU**2) - 4.0 / 3.0))
    assert errs[1] < errs[0] / 8


def test_grid_rejects_even_counts():
    with pytest.raises(ValueError):
        Grid1D(20.0, 400)


def _bump(x, centre, width):
    return np.exp(-((x - centre) ** 2) / width**2)


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.7, 3.0), st.floats(0.7, 3.0))
def test_linearization_is_symmetric(profile, c1, c2, w1, w2):
    f = _bump(profile.x, c1, w1)
    g = _bump(profile.x, c2, w2)
    a = profile.integrate(profile.apply_L(f) * g)
    b = profile.integrate(f * profile.apply_L(g))
    assert a == pytest.approx(b, abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(-1.0, 1.0))
def test_linearization_preserves_parity(profile, width, amp):
    even = amp * _bump(profile.x, 0.0, width)
    out = profile.apply_L(even)
    assert np.max(np.abs(out - out[::-1])[1:-1]) < 1e-9
