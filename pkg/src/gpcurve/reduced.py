"""The reduced system for the modulation pair (f, e): its two linear solvers and the outer fixed point."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from . import ansatz as an
from . import strip as sx
from .errors import BudgetExceeded, Degenerate, NonConvergence, Resonant
from .stability import check_gap_epsilon, fourier_diff_matrix, lambda_star


def f_potential(strip):
    """(3/2)ε²W_tt/β⁴ − 5κ²/(3β²), the zeroth-order coefficient of the divergence form."""
    tr = strip.tr
    return 1.5 * strip.geometry.eps2 * tr.Wtt / tr.beta**4 - 5.0 * tr.kappa**2 / (3.0 * tr.beta**2)


def f_operator_matrix(strip):
    """Symmetric matrix of −q²∂_τ(β⁴∂_τ) + β⁴V on the τ-grid, and the weight β⁴."""
    D = fourier_diff_matrix(strip.n_tau, 2.0 * np.pi)
    b4 = strip.beta**4
    K = -(strip.q**2) * D @ (b4[:, None] * D) + np.diag(b4 * f_potential(strip))
    return 0.5 * (K + K.T), b4


def f_divergence_form(strip, f_tilde):
    """−q²β⁻⁴∂_τ(β⁴f̃_τ) + V f̃."""
    b4 = strip.beta**4
    return -(strip.q**2) * strip.dtau(b4 * strip.dtau(f_tilde)) / b4 + f_potential(strip) * f_tilde


def f_spectrum(strip):
    K, b4 = f_operator_matrix(strip)
    return eigh(K, np.diag(b4), eigvals_only=True)


def solve_f_linear(strip, rhs, jacobi=None, c2_hat=1.0, alpha=0.2):
    """Solve L̂₁𝔣 = 𝔥 for periodic 𝔣 through the substitution 𝔣 = βf̃, 𝔥 = βh̃."""
    if jacobi is not None and not jacobi.satisfies_nondegeneracy(strip.epsilon, c2_hat, alpha):
        raise Resonant("Jacobi spectrum gap %.3e is below the non-degeneracy threshold %.3e" % (jacobi.d_epsilon, c2_hat * strip.epsilon**alpha))
    K, b4 = f_operator_matrix(strip)
    mu = eigh(K, np.diag(b4), eigvals_only=True)
    if np.min(np.abs(mu)) < 1e-12 * max(1.0, float(np.max(np.abs(mu)))):
        raise Degenerate("f-operator has a periodic kernel (eigenvalue %.3e)" % mu[np.argmin(np.abs(mu))])
    h_tilde = np.asarray(rhs, dtype=float) / strip.beta
    f_tilde = np.linalg.solve(K, b4 * h_tilde)
    return strip.beta * f_tilde


def e_denominators(strip, lambda0):
    j = np.arange(strip.n_tau // 2 + 1)
    return lambda0 - (strip.epsilon * strip.q * j) ** 2


def solve_e_linear(strip, lambda0, rhs, c=0.01):
    """Solve ε²q²𝔢'' + λ₀𝔢 = d mode by mode; Resonant when a denominator is within 4π²cε/ℓ̃ of zero."""
    den = e_denominators(strip, lambda0)
    limit = c * strip.epsilon / strip.ell_tilde
    bad = np.abs(den) / (4.0 * np.pi**2) < limit
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0])
        raise Resonant("e-mode %d has denominator %.3e below the gap %.3e" % (j, den[j], 4.0 * np.pi**2 * limit))
    coef = np.fft.rfft(np.asarray(rhs, dtype=float)) / den
    return np.fft.irfft(coef, n=strip.n_tau)


def e_operator_apply(strip, lambda0, e):
    return strip.epsilon**2 * strip.q**2 * strip.dtau(e, 2) + lambda0 * e


def measured_drift(strip, basis):
    """𝒟₁(θ) read off the U'-projection of the unmodulated ansatz error: c(τ) = ε³𝒟₁/β³."""
    err = an.evaluate_error(an.build_ansatz(strip, basis, an.ModulationPair(strip)))
    return err.c * strip.beta**3 / strip.epsilon**3


def assemble_reduced_rhs(strip, constants, modulation, drift):
    """Retained analytic right-hand sides of the two reduced equations."""
    k = constants
    eps, q = strip.epsilon, strip.q
    tr = strip.tr
    beta, b1 = tr.beta, tr.beta1
    bold = tr.kappa / beta
    f, f1 = modulation.f, modulation.f1
    e, e1, e2 = modulation.e, modulation.e1, modulation.e2
    rho1 = k.rho1
    rhs_f = -(
        bold * (k.d1 + k.d2) * e / (rho1 * beta)
        + eps * drift / (beta**3 * rho1)
        + k.d6 * bold * eps**2 * e2 / (beta * rho1 * strip.ell_tilde**2)
        + eps / (beta**3 * rho1) * (-2.0 * q**2 * f1 + 2.0 * q * b1 / beta**2 * f) * e1 * k.d8
    )
    eps2Wtt = strip.geometry.eps2 * tr.Wtt
    rhs_e = -(
        -0.5 * eps * eps2Wtt / beta**3 * f**2 * k.b5
        + 4.0 / 9.0 * beta * eps * f**2 * bold**2 * k.b3
        + eps * beta * (q**2 * f1**2 - 2.0 * q * b1 / beta**2 * f * f1 + b1**2 / beta**4 * f**2) * k.b6
        + 2.0 / 3.0 * eps * bold * f * e
        + eps * 3.0 / beta * e**2 * k.b1
        - eps**3 * 2.0 * q**2 * bold * e2 * f
    )
    return rhs_f, rhs_e


def quadrature_rhs(strip, basis, modulation, lambda0, phi=None):
    """L̂f − G and L̂₂e − G_e from direct quadrature of the projected error of w₂ (+ φ)."""
    fld = an.build_ansatz(strip, basis, modulation)
    w = fld.w2 if phi is None else fld.w2 + phi
    S = fld.operator.error(w)
    prof = strip.profile
    Gf = strip.integrate_x(S * prof.dU[:, None]) / (strip.epsilon**2 * prof.constants.rho1)
    Ge = strip.beta / strip.epsilon * strip.integrate_x(S * prof.Z[:, None])
    return an.f_operator_apply(strip, modulation.f) - Gf, e_operator_apply(strip, lambda0, modulation.e) - Ge


@dataclass
class ReducedReport:
    modulation: an.ModulationPair
    phi: np.ndarray
    iterations: int
    log: list = field(default_factory=list)
    residual_f: float = np.nan
    residual_e: float = np.nan
    c: np.ndarray = None
    d: np.ndarray = None
    budgets: dict = field(default_factory=dict)
    tail: float = 0.0
    floor: float = 1e-9
    stalled: bool = False

    @property
    def contraction(self):
        """Largest ratio of successive steps while the later step is above the round-off floor."""
        steps = np.array([entry["step"] for entry in self.log])
        if steps.size < 2:
            return 0.0
        keep = steps[1:] > self.floor
        ratios = steps[1:][keep] / steps[:-1][keep]
        return float(np.max(ratios)) if ratios.size else 0.0

    def as_dict(self):
        m = self.modulation
        return {
            "iterations": self.iterations,
            "residual_f": self.residual_f,
            "residual_e": self.residual_e,
            "contraction": self.contraction,
            "stalled_at_floor": self.stalled,
            "norm_f_star": m.norm_star,
            "norm_e_starstar": m.norm_starstar,
            "budgets": self.budgets,
            "outer_tail": self.tail,
            "log": self.log,
        }


def _projected_residuals(strip, fld, phi):
    prof = strip.profile
    S = fld.operator.error(fld.w2 + phi)
    cp = strip.integrate_x(S * prof.dU[:, None])
    dp = strip.integrate_x(S * prof.Z[:, None])
    Gf = cp / (strip.epsilon**2 * prof.constants.rho1)
    Ge = strip.beta / strip.epsilon * dp
    return Gf, Ge


def solve_reduced_fixed_point(strip, basis, lambda0=None, jacobi=None, gap_c=0.01, c2_hat=1.0, alpha=0.2, varrho=0.7, c_bar=10.0, delta=0.1, tol=1e-10, floor=1e-8, inner_tol=1e-13, max_iter=60):
    """Outer iteration on (f, e): each sweep solves the inner problem for φ*, projects S(w₂ + φ*)
    on U' and Z, and corrects e and then f with the inverted leading operators."""
    prof = strip.profile
    k = prof.constants
    lam = prof.lambda0 if lambda0 is None else lambda0
    gap = check_gap_epsilon(strip.epsilon, strip.ell_tilde, lambda_star(lam), gap_c)
    if not gap.passed:
        raise Resonant("ε-gap fails at j = %d (margin %.3e)" % (gap.nearest_j, gap.margin))
    mod = an.ModulationPair(strip)
    phi = np.zeros(strip.shape)
    log = []
    stalled = False
    bold = strip.tr.kappa / strip.beta
    coupling = bold * (k.d1 + k.d2) / (k.rho1 * strip.beta)
    for it in range(1, max_iter + 1):
        fld = an.build_ansatz(strip, basis, mod)
        err = an.evaluate_error(fld)
        solver = sx.StripSolver(fld.operator, fld.w2)
        inner = sx.inner_fixed_point(solver, err.E11, tol=inner_tol)
        phi = inner.phi
        Gf, Ge = _projected_residuals(strip, fld, phi)
        de = -solve_e_linear(strip, lam, Ge, c=gap_c)
        df = -solve_f_linear(strip, Gf + coupling * de, jacobi, c2_hat, alpha)
        step = an.norm_star(strip, df) + an.norm_starstar(strip, de)
        log.append({
            "iteration": it,
            "step": float(step),
            "residual_f": float(strip.l2_tau(Gf)),
            "residual_e": float(strip.l2_tau(Ge)),
            "inner_iterations": inner.iterations,
            "phi_h2star": sx.h2star_norm(strip, phi),
        })
        mod = an.ModulationPair(strip, mod.f + df, mod.e + de)
        if step < tol:
            break
        # quadrature round-off in the projections sets a floor; accept a stall just above tol
        if it >= 4 and step < floor and min(e["step"] for e in log[-4:-1]) <= step:
            stalled = True
            break
        if it >= 5 and step > floor and all(log[-i]["step"] > log[-i - 1]["step"] for i in range(1, 4)):
            raise NonConvergence("reduced iteration diverges (steps %s)" % ["%.2e" % e["step"] for e in log[-4:]])
    else:
        raise NonConvergence("reduced iteration did not reach %.1e in %d sweeps (last step %.2e)" % (tol, max_iter, log[-1]["step"]))

    fld = an.build_ansatz(strip, basis, mod)
    err = an.evaluate_error(fld)
    solver = sx.StripSolver(fld.operator, fld.w2)
    inner = sx.inner_fixed_point(solver, err.E11, tol=inner_tol)
    phi = inner.phi
    Gf, Ge = _projected_residuals(strip, fld, phi)
    eps = strip.epsilon
    budgets = {
        "f_star": {"value": mod.norm_star, "limit": c_bar * eps ** (1.0 - alpha)},
        "e_starstar": {"value": mod.norm_starstar, "limit": c_bar * eps ** (1.5 * varrho + 0.5 - 2.0 * alpha)},
    }
    report = ReducedReport(
        modulation=mod,
        phi=phi,
        iterations=len(log),
        log=log,
        residual_f=float(np.max(np.abs(Gf))),
        residual_e=float(np.max(np.abs(Ge))),
        c=inner.c,
        d=inner.d,
        budgets=budgets,
        tail=sx.outer_tail(strip, fld.w2 + phi, delta),
        floor=floor,
        stalled=stalled,
    )
    for name, b in budgets.items():
        if b["value"] > b["limit"]:
            raise BudgetExceeded("%s = %.3e exceeds its budget %.3e" % (name, b["value"], b["limit"]))
    return report
