"""Solution-quality diagnostics: integral identities in tube coordinates, the concentration
condition, the mass functional and the ε–a relation."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NoAdmissibleEpsilon, OutsideTube
from .numerics import periodic_derivative
from .stability import check_gap_a, check_gap_epsilon, lambda_star


def _theta_term(u, jac, length):
    """∂θ[(1+κt)⁻¹ u_θ] on a uniform periodic θ-grid."""
    return periodic_derivative(periodic_derivative(u, length, axis=1) / jac, length, axis=1)


def pohozaev_residuals(geometry, t, u, u_t, weights, theta=None):
    """Three integral identities per θ for u(t, θ) on |t| ≤ M.

    t, weights: quadrature nodes and weights in t; u, u_t: arrays (n_t, n_θ) on a uniform
    θ-grid over [0, ℓ). Returns a dict with the residuals |LHS − RHS| of each identity, the
    magnitudes of the LHS, and the consistency of the third with 2κ·first − second.
    """
    t = np.asarray(t, dtype=float)
    n_theta = u.shape[1]
    length = geometry.length
    theta = np.arange(n_theta) * length / n_theta if theta is None else theta
    M = float(np.max(np.abs(t)))
    if M >= geometry.M0:
        raise OutsideTube("identity window %.3g exceeds the tube half-width %.3g" % (M, geometry.M0))
    tr = geometry.traces(theta)
    kap = tr.kappa[None, :]
    T = t[:, None]
    jac = 1.0 + kap * T
    W, Wt = geometry.potential_along_normals(np.broadcast_to(T, u.shape), np.broadcast_to(theta[None, :], u.shape))
    e2 = geometry.eps2
    V = 1.0 + e2 * W
    th = _theta_term(u, jac, length)
    eps2 = geometry.epsilon**2

    def integ(arr):
        return weights @ arr

    def bnd(arr):
        return arr[-1] - arr[0]

    lhs1 = eps2 * integ(jac * u_t**2) + integ(jac * V * u**2) - integ(jac * u**4)
    rhs1 = eps2 * integ(u * th) + eps2 * bnd(jac * u * u_t)
    lhs2 = eps2 * integ(jac**2 * e2 * Wt / eps2 * u**2) + 2.0 * tr.kappa * integ(jac * V * u**2) - tr.kappa * integ(jac * u**4)
    rhs2 = -2.0 * eps2 * integ(jac * u_t * th) - eps2 * bnd((jac * u_t) ** 2) + bnd(jac**2 * V * u**2) - 0.5 * bnd(jac**2 * u**4)
    lhs3 = 2.0 * eps2 * tr.kappa * integ(jac * u_t**2) - eps2 * integ(jac**2 * e2 * Wt / eps2 * u**2) - tr.kappa * integ(jac * u**4)
    rhs3 = (
        2.0 * eps2 * integ((kap * u + jac * u_t) * th)
        + 2.0 * eps2 * tr.kappa * bnd(jac * u * u_t)
        + eps2 * bnd((jac * u_t) ** 2)
        - bnd(jac**2 * V * u**2)
        + 0.5 * bnd(jac**2 * u**4)
    )
    r1, r2, r3 = lhs1 - rhs1, lhs2 - rhs2, lhs3 - rhs3
    return {
        "theta": theta,
        "identity1": np.abs(r1),
        "identity2": np.abs(r2),
        "identity3": np.abs(r3),
        "scale": np.abs(integ(jac * u**4)),
        "consistency": np.abs(r3 - (2.0 * tr.kappa * r1 - r2)),
    }


def pohozaev_summary(res):
    return {k: float(np.max(res[k])) for k in ("identity1", "identity2", "identity3", "scale", "consistency")}


def necessary_condition_residual(geometry, p=3, theta=None, form=None):
    """Concentration condition along the curve.

    p = 3: 3ε²W_t/(2[1+ε²W]) + κ. General p (or form="general"): σV_t/V + κ with
    V = 1 + ε²W and σ = (p+1)/(p−1) − ½.
    """
    if p <= 1:
        raise ValueError("the exponent p must exceed 1")
    tr = geometry.nodes if theta is None else geometry.traces(theta)
    e2 = geometry.eps2
    V = 1.0 + e2 * tr.W0
    Vt = e2 * tr.Wt
    if form is None:
        form = "cubic" if p == 3 else "general"
    if form == "cubic":
        if p != 3:
            raise ValueError("the cubic form needs p = 3")
        return 3.0 * e2 * tr.Wt / (2.0 * (1.0 + e2 * tr.W0)) + tr.kappa
    sigma = (p + 1.0) / (p - 1.0) - 0.5
    return (sigma * Vt + tr.kappa * V) / V


def weighted_condition(geometry, constants, test_functions=None, p=3):
    """ϱ₀∫φβ(ε²/2)W_t + ((p−1)/(p+1)ϱ_p − ϱ₁)∫φκβ³ per test function φ(θ), using a uniform θ-grid.

    At p = 3 the integrand is (4/3)φβ(κβ² + (3/2)ε²W_t), so the values vanish on stationary curves.
    """
    if p != 3:
        raise ValueError("tabulated profile constants exist only for p = 3")
    n = geometry.theta_nodes.size
    theta = geometry.theta_nodes
    tr = geometry.nodes
    if test_functions is None:
        w = 2.0 * np.pi / geometry.length
        test_functions = {"1": np.ones(n), "cos": np.cos(w * theta), "sin": np.sin(w * theta)}
    coef = (p - 1.0) / (p + 1.0) * constants.rho_p - constants.rho1
    dtheta = geometry.length / n
    out = {}
    for name, phi in test_functions.items():
        val = constants.rho0 * np.sum(phi * tr.beta * 0.5 * geometry.eps2 * tr.Wt) + coef * np.sum(phi * tr.kappa * tr.beta**3)
        out[name] = float(val * dtheta / max(np.max(np.abs(phi)), 1e-300))
    return out


def mass_fermi(t, weights, u, geometry, theta=None):
    """∫∫u²(1+κt) dt dθ on a uniform periodic θ-grid."""
    n = u.shape[1]
    theta = np.arange(n) * geometry.length / n if theta is None else theta
    kap = geometry.traces(theta).kappa
    jac = 1.0 + kap[None, :] * np.asarray(t)[:, None]
    return float(np.sum(weights @ (u**2 * jac)) * geometry.length / n)


def mass_of_strip_field(strip, w, modulation=None):
    """∫|v|² over the tube for v = βw(x, τ): (ε/q)∫∫ w²(1+κt) dx dτ, with the x-window tail reported."""
    f = np.zeros(strip.n_tau) if modulation is None else modulation.f
    t = strip.epsilon * (strip.x[:, None] + f[None, :]) / strip.beta[None, :]
    jac = 1.0 + strip.tr.kappa[None, :] * t
    dens = w**2 * jac
    total = np.sum(strip.integrate_x(dens)) * 2.0 * np.pi / strip.n_tau * strip.epsilon / strip.q
    inside = np.zeros_like(dens)
    inside[strip.window] = dens[strip.window]
    tail = abs(total - np.sum(strip.integrate_x(inside)) * 2.0 * np.pi / strip.n_tau * strip.epsilon / strip.q)
    return float(total), float(tail)


def mass_of_solution(field, geometry=None, epsilon=None):
    """Mass of any supported field: a radial oracle solution, an AnsatzField, or (t, weights, u) Fermi samples."""
    if hasattr(field, "r") and hasattr(field, "u"):
        return field.mass
    if hasattr(field, "strip") and hasattr(field, "w2"):
        return mass_of_strip_field(field.strip, field.w2, field.modulation)[0]
    t, weights, u = field
    return mass_fermi(t, weights, u, geometry)


@dataclass
class EpsilonFit:
    epsilon: float
    a: float
    ell_tilde: float
    identity_error: float
    gap_a: object
    gap_epsilon: object
    shifted: bool
    epsilon_root: float

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "epsilon_root": self.epsilon_root,
            "a": self.a,
            "ell_tilde": self.ell_tilde,
            "identity_error": self.identity_error,
            "shifted": self.shifted,
            "gap_a": vars(self.gap_a),
            "gap_epsilon": vars(self.gap_epsilon),
        }


def fit_epsilon(a, ell_tilde_of, lambda0, gap_c=0.01, rho0=4.0, bracket=(1e-4, 0.5), max_shift=2000):
    """Solve ε/ℓ̃(ε) = ϱ₀/a; if a gap fails, walk ε outwards in small relative steps to the nearest admissible value.

    ell_tilde_of maps ε to the weighted length of the concentration curve.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    target = rho0 / a
    lam = lambda_star(lambda0)

    def g(eps):
        return eps / ell_tilde_of(eps) - target

    lo, hi = bracket
    if g(lo) * g(hi) > 0:
        raise NoAdmissibleEpsilon("ε/ℓ̃ = ϱ₀/a has no root in [%.3g, %.3g]" % (lo, hi))
    eps = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)
    root = eps
    lt = ell_tilde_of(eps)
    ident = abs(a * eps / lt - rho0)

    def admissible(e_try):
        lt_try = ell_tilde_of(e_try)
        ga = check_gap_a(rho0 * lt_try / e_try, gap_c, rho0, lam)
        ge = check_gap_epsilon(e_try, lt_try, lam, gap_c)
        return ga, ge

    ga, ge = admissible(eps)
    if ga.passed and ge.passed:
        return EpsilonFit(eps, a, lt, ident, ga, ge, False, root)
    step = 1e-4 * eps
    for k in range(1, max_shift + 1):
        for cand in (eps + k * step, eps - k * step):
            if not lo <= cand <= hi:
                continue
            ga, ge = admissible(cand)
            if ga.passed and ge.passed:
                lt = ell_tilde_of(cand)
                return EpsilonFit(cand, rho0 * lt / cand, lt, ident, ga, ge, True, root)
    raise NoAdmissibleEpsilon("every ε within %.1f%% of %.6g lies in a forbidden band" % (100 * max_shift * 1e-4, eps))
