"""Approximate solutions on the strip and the full error operator S(w).

Strip coordinates: x = βs − f(τ) with s = t/ε the stretched normal distance, and τ the
Liouville variable. A field w(x, τ) stands for v = βw in (s, z) = (t/ε, θ/ε).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GeometryMismatch, OutsideTube
from .numerics import periodic_derivative, simpson_weights

TWO_THIRDS = 2.0 / 3.0


class Strip:
    """The (x, τ) grid attached to a tube: profile grid in x, uniform periodic grid in τ."""

    def __init__(self, geometry, profile, n_tau=33, window=15.0):
        self.geometry = geometry
        self.profile = profile
        self.epsilon = geometry.epsilon
        self.n_tau = int(n_tau)
        self.tau = 2.0 * np.pi * np.arange(self.n_tau) / self.n_tau
        self.theta = geometry.liouville_inverse(self.tau)
        self.tr = geometry.traces(self.theta)
        self.x = profile.x
        self.ell_tilde = geometry.ell_tilde
        self.q = 2.0 * np.pi / self.ell_tilde
        half = min(window, 0.9 * geometry.M0 * float(np.min(self.tr.beta)) / self.epsilon)
        idx = np.nonzero(np.abs(self.x) <= half + 1e-12)[0]
        self.window = slice(int(idx[0]), int(idx[-1]) + 1)
        self.window_half = float(self.x[idx[-1]])
        self.window_weights = simpson_weights(idx.size, profile.grid.h)

    @property
    def shape(self):
        return (self.x.size, self.n_tau)

    @property
    def beta(self):
        return self.tr.beta

    def dx(self, arr):
        return self.profile.grid.d1 @ arr

    def dxx(self, arr):
        return self.profile.grid.d2 @ arr

    def dtau(self, arr, order=1):
        return periodic_derivative(arr, 2.0 * np.pi, order=order, axis=-1)

    def derivatives(self, w):
        wx = self.dx(w)
        return {
            "w": w,
            "x": wx,
            "xx": self.dxx(w),
            "t": self.dtau(w),
            "tt": self.dtau(w, 2),
            "xt": self.dtau(wx),
        }

    def integrate_x(self, arr):
        """∫ arr dx over the full x-grid, per τ."""
        return self.profile.grid.integrate(arr, axis=0)

    def mean_tau(self, values):
        return np.mean(values, axis=-1)

    def l2(self, arr, window=True):
        """L²(strip) norm: Simpson in x, rectangle rule in τ."""
        if window:
            sq = np.tensordot(self.window_weights, arr[self.window] ** 2, axes=([0], [0]))
        else:
            sq = self.integrate_x(arr**2)
        return float(np.sqrt(np.sum(sq) * 2.0 * np.pi / self.n_tau))

    def l2_tau(self, values):
        return float(np.sqrt(np.sum(np.asarray(values) ** 2) * 2.0 * np.pi / self.n_tau))


class ModulationPair:
    """Periodic modulation functions f (normal shift) and e (amplitude of the Z mode) on the τ-grid."""

    def __init__(self, strip, f=None, e=None):
        n = strip.n_tau
        self.strip = strip
        self.f = np.zeros(n) if f is None else np.broadcast_to(np.asarray(f, dtype=float), (n,)).copy()
        self.e = np.zeros(n) if e is None else np.broadcast_to(np.asarray(e, dtype=float), (n,)).copy()

    @classmethod
    def from_functions(cls, strip, f=None, e=None):
        tau = strip.tau
        return cls(strip, None if f is None else f(tau), None if e is None else e(tau))

    @cached_property
    def f1(self):
        return self.strip.dtau(self.f)

    @cached_property
    def f2(self):
        return self.strip.dtau(self.f, 2)

    @cached_property
    def e1(self):
        return self.strip.dtau(self.e)

    @cached_property
    def e2(self):
        return self.strip.dtau(self.e, 2)

    @property
    def norm_star(self):
        return norm_star(self.strip, self.f)

    @property
    def norm_starstar(self):
        return norm_starstar(self.strip, self.e)

    def periodicity_defect(self):
        """Mismatch of f, f', e, e' between τ = 0 and τ = 2π through the trigonometric interpolant."""
        from .numerics import periodic_eval

        out = 0.0
        for arr in (self.f, self.f1, self.e, self.e1):
            ends = periodic_eval(arr, 2.0 * np.pi, np.array([0.0, 2.0 * np.pi]))
            out = max(out, abs(ends[1] - ends[0]))
        return out

    def admissible(self, alpha=0.2, varrho=0.7, c_bar=1.0):
        eps = self.strip.epsilon
        return (
            self.norm_star <= c_bar * eps ** (1.0 - alpha),
            self.norm_starstar <= c_bar * eps ** (1.5 * varrho + 0.5 - 2.0 * alpha),
        )


def norm_star(strip, f):
    """‖βf‖ + ‖(β/ℓ̃) f_τ‖ + ‖(β/ℓ̃²) f_ττ‖ in L²(0, 2π)."""
    b, lt = strip.beta, strip.ell_tilde
    return strip.l2_tau(b * f) + strip.l2_tau(b * strip.dtau(f) / lt) + strip.l2_tau(b * strip.dtau(f, 2) / lt**2)


def norm_starstar(strip, e):
    """‖e‖_∞ + (ε/ℓ̃)‖e'‖ + (ε²/ℓ̃²)‖e''‖."""
    r = strip.epsilon / strip.ell_tilde
    return float(np.max(np.abs(e))) + r * strip.l2_tau(strip.dtau(e)) + r**2 * strip.l2_tau(strip.dtau(e, 2))


class StripOperator:
    """The operator S(w) = [ε²Δv − (1 + ε²W)v]/β³ + w³ with v = βw, written in strip coordinates.

    Coefficients depend on the geometry and on f only, so one instance serves every w.
    """

    def __init__(self, strip, modulation):
        self.strip = strip
        self.mod = modulation
        eps, q = strip.epsilon, strip.q
        tr = strip.tr
        x = strip.x[:, None]
        beta, b1, b2 = tr.beta[None, :], tr.beta1[None, :], tr.beta2[None, :]
        f, f1, f2 = modulation.f[None, :], modulation.f1[None, :], modulation.f2[None, :]
        s = (x + f) / beta
        M0 = strip.geometry.M0
        reach = eps * np.max(np.abs(s[strip.window]))
        if reach >= M0:
            raise OutsideTube("strip window reaches normal distance %.3g beyond tube half-width %.3g" % (reach, M0))
        # beyond the window the fields are below e^{-15}; freeze the coefficients at 0.98 M0
        self.s = np.clip(s, -0.98 * M0 / eps, 0.98 * M0 / eps)
        t = eps * self.s
        self.t = t
        self.kappa = tr.kappa[None, :]
        self.dkappa = tr.dkappa[None, :]
        self.a = 1.0 / (1.0 + self.kappa * t)
        self.A = eps * (b1 * self.s - q * beta * f1)
        self.B = eps**2 * (b2 * self.s - q * b1 * f1 - q**2 * beta**2 * f2)
        self.T = eps * q * beta
        self.Tz = eps**2 * q * b1
        self.beta = beta
        self.b1 = b1
        W, Wn = strip.geometry.potential_along_normals(t, np.broadcast_to(strip.theta[None, :], t.shape))
        self.eps2W = strip.geometry.eps2 * W
        self.eps2Wn = strip.geometry.eps2 * Wn

    def linear(self, w, d=None):
        """Linear part of S, i.e. S(w) − w³."""
        d = self.strip.derivatives(w) if d is None else d
        w = d["w"]
        eps = self.strip.epsilon
        beta, b1 = self.beta, self.b1
        A, T = self.A, self.T
        wz = d["x"] * A + d["t"] * T
        wzz = d["xx"] * A**2 + 2.0 * d["xt"] * A * T + d["tt"] * T**2 + d["x"] * self.B + d["t"] * self.Tz
        tr = self.strip.tr
        b2 = tr.beta2[None, :]
        vs = beta**2 * d["x"]
        vss = beta**3 * d["xx"]
        vz = eps * b1 * w + beta * wz
        vzz = eps**2 * b2 * w + 2.0 * eps * b1 * wz + beta * wzz
        a = self.a
        lap = vss + eps * self.kappa * a * vs + a**2 * vzz - eps**2 * self.s * self.dkappa * a**3 * vz
        return lap / beta**3 - (1.0 + self.eps2W) * w / beta**2

    @cached_property
    def coefficients(self):
        """Coefficient arrays of w, w_x, w_xx, w_τ, w_ττ, w_xτ in the linear part."""
        keys = ("w", "x", "xx", "t", "tt", "xt")
        zero = np.zeros(self.strip.shape)
        out = {}
        for k in keys:
            d = {j: zero for j in keys}
            d[k] = np.ones(self.strip.shape)
            out[k] = self.linear(None, d)
        return out

    def error(self, w):
        return self.linear(w) + w**3

    def linearized(self, phi, w2):
        return self.linear(phi) + 3.0 * w2**2 * phi

    def flat_part(self, phi):
        """ε²q²φ_ττ + φ_xx − φ + 3U²φ, the part of the linearization inverted mode by mode."""
        st = self.strip
        U = st.profile.U[:, None]
        return st.epsilon**2 * st.q**2 * st.dtau(phi, 2) + st.dxx(phi) - phi + 3.0 * U**2 * phi

    def paper_error(self, w, kappa_prime_sign=-1.0):
        """S in the expanded form (ε²4π²/ℓ̃²)w_ττ + w_xx − w + w³ + B₄ + B₅ + B₆.

        The Taylor tail of the potential beyond second order is kept exact. kappa_prime_sign
        selects the sign of the κ' group; −1 matches the Laplace–Beltrami operator.
        """
        st = self.strip
        eps, q = st.epsilon, st.q
        d = st.derivatives(w)
        tr = st.tr
        beta = self.beta
        b1 = self.b1
        b2 = tr.beta2[None, :]
        kap = self.kappa
        f1 = self.mod.f1[None, :]
        f2 = self.mod.f2[None, :]
        X = self.s * beta
        Wtt = st.geometry.eps2 * tr.Wtt[None, :]
        Wt = st.geometry.eps2 * tr.Wt[None, :]
        W0 = st.geometry.eps2 * tr.W0[None, :]
        wx, wxx, wt, wtt, wxt = d["x"], d["xx"], d["t"], d["tt"], d["xt"]
        main = eps**2 * q**2 * wtt + wxx - w + w**3
        B4 = eps * (kap / beta) * (wx + TWO_THIRDS * X * w)
        B5 = (
            eps**2 * q**2 * (f1**2 * wxx - f2 * wx - 2.0 * f1 * wxt)
            + eps**2 * 3.0 * q * (b1 / beta**2) * (-f1 * wx + wt)
            + eps**2 * 2.0 * q * (b1 / beta**2) * X * (-f1 * wxx + wxt)
            + eps**2 * (b2 / beta**3 + 2.0 * b1**2 / beta**4 - kap**2 / beta**2) * X * wx
            + eps**2 * (b2 / beta**3) * w
            + eps**2 * (b1**2 / beta**4) * X**2 * wxx
            - 0.5 * eps**2 * (Wtt / beta**4) * X**2 * w
        )
        t = self.t
        tail = self.eps2W - W0 - t * Wt - 0.5 * t**2 * Wtt
        a3 = 1.0 / (1.0 + t * kap)
        a2 = (-2.0 - t * kap) / (1.0 + t * kap) ** 2
        a1 = 1.0 / (1.0 + t * kap) ** 3
        brace2 = (
            (b2 / beta**4) * X * w
            + 2.0 * (b1**2 / beta**5) * X**2 * wx
            + 3.0 * q * (b1 / beta**3) * X * (-f1 * wx + wt)
            + 2.0 * q * (b1 / beta**3) * X**2 * (-f1 * wxx + wxt)
            + (b1**2 / beta**5) * X**3 * wxx
            + (b2 / beta**4) * X**2 * wx
            + q**2 / beta * X * (f1**2 * wxx - f2 * wx + wtt - 2.0 * f1 * wxt)
        )
        brace1 = (b1 / beta**4) * X * w + (b1 / beta**4) * X**2 * wx + q / beta**2 * X * (-f1 * wx + wt)
        B6 = (
            -tail * w / beta**2
            + eps**3 * kap**3 * a3 / beta**3 * X**2 * wx
            + eps**3 * kap * a2 * brace2
            + kappa_prime_sign * eps**3 * self.dkappa * a1 * brace1
        )
        return main + B4 + B5 + B6

    def stationarity_gap(self, w):
        """S_paper − S_exact, which is ε(ε²W_t + ⅔κβ²)/β³ (x + f) w and vanishes on stationary curves."""
        tr = self.strip.tr
        coef = (self.strip.geometry.eps2 * tr.Wt + TWO_THIRDS * tr.kappa * tr.beta**2) / tr.beta**3
        return self.strip.epsilon * coef[None, :] * self.s * self.beta * w


@dataclass
class AnsatzField:
    strip: Strip
    modulation: ModulationPair
    w0: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    w2: np.ndarray

    @cached_property
    def operator(self):
        return StripOperator(self.strip, self.modulation)


def second_correction_coefficients(strip):
    """The seven τ-dependent coefficients of φ₂ against ϖ₂ … ϖ₈."""
    tr = strip.tr
    beta, b1, b2, kap = tr.beta, tr.beta1, tr.beta2, tr.kappa
    bb1 = kap / beta
    eps2Wtt = strip.geometry.eps2 * tr.Wtt
    return {
        2: b2 / beta**3,
        3: -0.5 * eps2Wtt / beta**4,
        4: 2.0 * b1**2 / beta**4 + b2 / beta**3 - kap**2 / beta**2,
        5: b1**2 / beta**4,
        6: bb1**2,
        7: TWO_THIRDS * bb1**2,
        8: 3.0 * bb1**2,
    }


def build_ansatz(strip, basis, modulation):
    """w₂ = U + ε(e/β)Z + εφ₁ + ε²φ₂."""
    if modulation.strip is not strip:
        raise GeometryMismatch("modulation built on a different strip")
    prof = strip.profile
    eps = strip.epsilon
    beta = strip.beta
    bb1 = strip.tr.kappa / beta
    U = prof.U[:, None]
    w0 = U + eps * (modulation.e / beta)[None, :] * prof.Z[:, None]
    phi1 = basis[1][:, None] * bb1[None, :] + TWO_THIRDS * basis[2][:, None] * (bb1 * modulation.f)[None, :]
    phi2 = np.zeros(strip.shape)
    for k, coef in second_correction_coefficients(strip).items():
        phi2 += basis[k][:, None] * coef[None, :]
    w2 = w0 + eps * phi1 + eps**2 * phi2
    return AnsatzField(strip, modulation, w0, phi1, phi2, w2)


@dataclass
class ErrorField:
    S: np.ndarray
    E11: np.ndarray
    E12: np.ndarray
    c: np.ndarray
    d: np.ndarray


def e12_field(strip, modulation):
    """(1/β)[ε³(4π²/ℓ̃²)e'' + ελ₀e] Z."""
    prof = strip.profile
    eps, q = strip.epsilon, strip.q
    amp = (eps**3 * q**2 * modulation.e2 + eps * prof.lambda0 * modulation.e) / strip.beta
    return prof.Z[:, None] * amp[None, :]


def evaluate_error(field, w=None):
    strip = field.strip
    w = field.w2 if w is None else w
    S = field.operator.error(w)
    E12 = e12_field(strip, field.modulation)
    prof = strip.profile
    c = strip.integrate_x(S * prof.dU[:, None])
    d = strip.integrate_x(S * prof.Z[:, None])
    return ErrorField(S, S - E12, E12, c, d)


def first_order_error(strip, modulation):
    """The analytic ε-order error terms S₁ = (κ/β)(U' + ⅔xU) and S₂ = ⅔(κ/β) f U."""
    prof = strip.profile
    bb1 = (strip.tr.kappa / strip.beta)[None, :]
    S1 = bb1 * (prof.dU + TWO_THIRDS * prof.x * prof.U)[:, None]
    S2 = TWO_THIRDS * bb1 * modulation.f[None, :] * prof.U[:, None]
    return S1, S2


def projection_constants(profile):
    """The d and b constants of the projected error."""
    table = profile.constants.as_dict()
    return {k: v for k, v in table.items() if k[0] in "db" and k[1:].isdigit()}


def f_operator_apply(strip, f):
    """L̂₁f = −q²f'' − 2q(β'/β²)f' + (β'²/β⁴ + β''/β³ − 5κ²/(3β²))f + (3/2)(ε²W_tt/β⁴)f."""
    tr = strip.tr
    q = strip.q
    beta, b1, b2, kap = tr.beta, tr.beta1, tr.beta2, tr.kappa
    eps2Wtt = strip.geometry.eps2 * tr.Wtt
    return (
        -(q**2) * strip.dtau(f, 2)
        - 2.0 * q * (b1 / beta**2) * strip.dtau(f)
        + (b1**2 / beta**4 + b2 / beta**3 - 5.0 * kap**2 / (3.0 * beta**2)) * f
        + 1.5 * eps2Wtt / beta**4 * f
    )


def project_error(err, strip, modulation):
    """c(τ) = ∫SU', d(τ) = ∫SZ together with their leading analytic parts."""
    prof = strip.profile
    k = prof.constants
    eps = strip.epsilon
    beta = strip.beta
    bb1 = strip.tr.kappa / beta
    c_lead = eps**2 * k.rho1 * f_operator_apply(strip, modulation.f) + eps**2 * bb1 * (k.d1 + k.d2) * modulation.e / beta
    d_lead = (eps**3 * strip.q**2 * modulation.e2 + eps * prof.lambda0 * modulation.e) / beta
    return err.c, err.d, {"c_leading": c_lead, "d_leading": d_lead}
