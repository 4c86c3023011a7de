import numpy as np
import pytest

from conftest import reference_strip
from gpcurve import ansatz as an
from gpcurve import strip as sx
from gpcurve.errors import NonConvergence


def _field(eps):
    strip = reference_strip(eps)
    return an.build_ansatz(strip, strip.profile.basis, an.ModulationPair(strip))


def _forcing(strip, seed):
    rng = np.random.default_rng(seed)
    x, tau = strip.x[:, None], strip.tau[None, :]
    h = np.zeros(strip.shape)
    for k in range(4):
        a, b, c = rng.normal(size=3)
        h += np.exp(-((x - c) ** 2)) * (a * np.cos(k * tau) + b * np.sin(k * tau))
    return h


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_projected_solve_residual_and_orthogonality(seed):
    fld = _field(0.05)
    solver = sx.StripSolver(fld.operator, fld.w2)
    h = _forcing(fld.strip, seed)
    sol = solver.solve(h)
    assert solver.residual(sol.phi, h, sol.c, sol.d) < 1e-8
    assert solver.orthogonality(sol.phi) < 1e-9
    ratio, bound = sx.appendix_a_ratio(fld.strip, sol.phi)
    assert ratio <= bound


def test_mode_bounds_are_uniform():
    fld = _field(0.05)
    solver = sx.StripSolver(fld.operator, fld.w2)
    h = _forcing(fld.strip, 9)
    sol = solver.solve(h)
    bounds = sx.mode_bounds(fld.strip, sol.phi, h)
    finite = bounds[np.isfinite(bounds)]
    assert finite.size >= 4 and np.max(finite) < 10.0


def test_unaveraged_splitting_diverges_at_coarse_epsilon():
    fld = _field(0.1)
    h = _forcing(fld.strip, 1)
    with pytest.raises(NonConvergence):
        sx.StripSolver(fld.operator, fld.w2, averaged=False).solve(h)
    sol = sx.StripSolver(fld.operator, fld.w2).solve(h)
    assert sol.iterations <= 5


def test_h2star_norm_of_separable_field():
    strip = reference_strip(0.05)
    g = np.exp(-strip.x**2)
    k = 3
    phi = g[:, None] * np.cos(k * strip.tau)[None, :]
    r = strip.epsilon / strip.ell_tilde
    q = strip.profile.integrate
    g1, g2 = strip.dx(g), strip.dxx(g)
    expect = np.pi * (q(g**2) * (1 + r**2 * k**2 + r**4 * k**4) + q(g1**2) * (1 + r**2 * k**2) + q(g2**2))
    assert sx.h2star_norm(strip, phi) ** 2 == pytest.approx(expect, rel=1e-10)


def test_appendix_a_on_tau_independent_field():
    strip = reference_strip(0.05)
    phi = np.repeat(strip.profile.U[:, None], strip.n_tau, axis=1)
    ratio, bound = sx.appendix_a_ratio(strip, phi)
    assert 0 < ratio <= bound


def test_nonlinear_term():
    w2, phi = np.array([1.0, 2.0]), np.array([0.5, -1.0])
    assert np.allclose(sx.nonlinear_term(w2, phi), -3 * w2 * phi**2 - phi**3)


def test_inner_fixed_point_is_a_fixed_point():
    fld = _field(0.05)
    err = an.evaluate_error(fld)
    solver = sx.StripSolver(fld.operator, fld.w2)
    sol = sx.inner_fixed_point(solver, err.E11)
    rhs = -err.E11 + sx.nonlinear_term(fld.w2, sol.phi)
    assert solver.residual(sol.phi, rhs, sol.c, sol.d) < 1e-8
    assert solver.orthogonality(sol.phi) < 1e-9
    tails = [sx.outer_tail(fld.strip, sol.phi, delta) for delta in (0.1, 0.3, 0.5)]
    assert tails[0] > tails[1] > tails[2]
    assert tails[2] < 0.1 * tails[0]
