"""Projected linear solves on the strip, the H²_* norm and the inner nonlinear fixed point."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergence


def h2star_norm(strip, phi):
    """√∫∫ φ² + φ_x² + φ_xx² + r²φ_xτ² + r²φ_τ² + r⁴φ_ττ², with r = ε/ℓ̃."""
    r = strip.epsilon / strip.ell_tilde
    px = strip.dx(phi)
    terms = phi**2 + px**2 + strip.dxx(phi) ** 2
    terms = terms + r**2 * strip.dtau(px) ** 2 + r**2 * strip.dtau(phi) ** 2 + r**4 * strip.dtau(phi, 2) ** 2
    return float(np.sqrt(np.sum(strip.integrate_x(terms)) * 2.0 * np.pi / strip.n_tau))


def appendix_a_ratio(strip, phi):
    """sup_τ ‖φ(·,τ)‖² / [(ℓ̃/ε)‖φ‖²_{H²_*}] together with the bound 1 + ε/(2πℓ̃) it must respect."""
    h2 = h2star_norm(strip, phi) ** 2
    bound = 1.0 + strip.epsilon / (2.0 * np.pi * strip.ell_tilde)
    if h2 == 0.0:
        return 0.0, bound
    sup = float(np.max(strip.integrate_x(phi**2)))
    return sup / (strip.ell_tilde / strip.epsilon * h2), bound


@dataclass
class StripSolution:
    phi: np.ndarray
    c: np.ndarray
    d: np.ndarray
    iterations: int
    history: list = field(default_factory=list)

    @property
    def contraction(self):
        h = [v for v in self.history if v > 0]
        if len(h) < 3:
            return 0.0
        return float(np.median(np.array(h[2:]) / np.array(h[1:-1])))


class StripSolver:
    """Inverse of the linearization ℒ = ℒ̄ + P modulo U' and Z.

    ℒ̄ keeps the τ-averaged coefficients of φ, φ_x, φ_xx, φ_ττ so that it diagonalizes in
    Fourier modes; each mode is a bordered banded solve on the interior x-nodes, factored once.
    The remainder P is absorbed by Picard iteration.
    """

    def __init__(self, operator, w2, averaged=True):
        self.op = operator
        self.strip = operator.strip
        st = self.strip
        prof = st.profile
        self.w2 = w2
        self.potential3 = 3.0 * w2**2
        coef = operator.coefficients
        if averaged:
            self.bar = {k: np.mean(coef[k], axis=1) for k in ("w", "x", "xx", "tt")}
            self.bar["w"] = self.bar["w"] + np.mean(self.potential3, axis=1)
        else:
            n = st.x.size
            self.bar = {
                "w": 3.0 * prof.U**2 - 1.0,
                "x": np.zeros(n),
                "xx": np.ones(n),
                "tt": np.full(n, st.epsilon**2 * st.q**2),
            }
        self.n_modes = st.n_tau // 2 + 1
        self._lu = {}
        g = prof.grid
        w = g.weights[1:-1]
        self._cols = sp.csc_matrix(np.column_stack([-prof.dU[1:-1], -prof.Z[1:-1]]))
        self._rows = sp.csr_matrix(np.vstack([w * prof.dU[1:-1], w * prof.Z[1:-1]]))

    def _factor(self, k):
        if k not in self._lu:
            g = self.strip.profile.grid
            b = {key: v[1:-1] for key, v in self.bar.items()}
            core = (
                sp.diags(b["xx"]) @ g.d2[1:-1, 1:-1]
                + sp.diags(b["x"]) @ g.d1[1:-1, 1:-1]
                + sp.diags(b["w"] - k * k * b["tt"])
            )
            mat = sp.bmat([[core, self._cols], [self._rows, None]]).tocsc()
            self._lu[k] = spla.splu(mat)
        return self._lu[k]

    def apply_full(self, phi):
        return self.op.linear(phi) + self.potential3 * phi

    def apply_bar(self, phi):
        b = self.bar
        st = self.strip
        return b["xx"][:, None] * st.dxx(phi) + b["x"][:, None] * st.dx(phi) + b["w"][:, None] * phi + b["tt"][:, None] * st.dtau(phi, 2)

    def perturbation(self, phi):
        return self.apply_full(phi) - self.apply_bar(phi)

    def solve_bar(self, h):
        """φ ⊥ U', Z per τ with ℒ̄φ = h + cU' + dZ."""
        st = self.strip
        nx, nt = st.shape
        coef = np.fft.rfft(h, axis=1)
        phi_hat = np.zeros((nx, coef.shape[1]), dtype=complex)
        c_hat = np.zeros(coef.shape[1], dtype=complex)
        d_hat = np.zeros(coef.shape[1], dtype=complex)
        tiny = 1e-14 * max(1.0, float(np.max(np.abs(coef))) if coef.size else 1.0)
        for k in range(coef.shape[1]):
            hk = coef[1:-1, k]
            if np.max(np.abs(hk)) <= tiny:
                continue
            rhs = np.zeros((nx, 2))
            rhs[: nx - 2, 0] = hk.real
            rhs[: nx - 2, 1] = hk.imag
            sol = self._factor(k).solve(rhs)
            z = sol[:, 0] + 1j * sol[:, 1]
            phi_hat[1:-1, k] = z[: nx - 2]
            c_hat[k], d_hat[k] = z[nx - 2], z[nx - 1]
        phi = np.fft.irfft(phi_hat, n=nt, axis=1)
        c = np.fft.irfft(c_hat, n=nt)
        d = np.fft.irfft(d_hat, n=nt)
        return phi, c, d

    def residual(self, phi, h, c, d):
        prof = self.strip.profile
        r = self.apply_full(phi) - h - c[None, :] * prof.dU[:, None] - d[None, :] * prof.Z[:, None]
        return float(np.max(np.abs(r[2:-2])))

    def orthogonality(self, phi):
        prof = self.strip.profile
        a = self.strip.integrate_x(phi * prof.dU[:, None])
        b = self.strip.integrate_x(phi * prof.Z[:, None])
        return float(max(np.max(np.abs(a)), np.max(np.abs(b))))

    def solve(self, h, tol=1e-12, max_iter=200, source=None):
        """Solve ℒφ = h + cU' + dZ with φ ⊥ U', Z; source(φ) is an optional extra φ-dependent right-hand side."""
        st = self.strip
        phi = np.zeros(st.shape)
        c = d = np.zeros(st.n_tau)
        history = []
        scale = max(h2star_norm(st, h), 1e-300)
        for it in range(1, max_iter + 1):
            rhs = h - self.perturbation(phi) if it > 1 else h.copy()
            if source is not None:
                rhs = rhs + source(phi)
            new, c, d = self.solve_bar(rhs)
            step = h2star_norm(st, new - phi)
            history.append(step)
            phi = new
            if step <= tol * scale or step == 0.0:
                return StripSolution(phi, c, d, it, history)
            if it >= 4 and step <= 1e-10 * scale and min(history[-4:-1]) <= step:
                return StripSolution(phi, c, d, it, history)
            if it >= 6 and step > 1e-8 * scale and history[-1] > history[-2] > history[-3] > history[-4]:
                raise NonConvergence("strip outer iteration diverges (steps %s)" % ["%.2e" % v for v in history[-4:]])
        raise NonConvergence("strip outer iteration did not converge in %d steps (last step %.2e)" % (max_iter, history[-1]))


def solve_strip_projected(solver, h, tol=1e-12):
    return solver.solve(h, tol=tol)


def nonlinear_term(w2, phi):
    """𝒩(φ) = −3w₂φ² − φ³."""
    return -3.0 * w2 * phi**2 - phi**3


def inner_fixed_point(solver, E11, tol=1e-10, max_iter=200):
    """φ = 𝒯(−E11 + 𝒩(φ)) with 𝒯 the projected inverse; the linear remainder and 𝒩 share one Picard loop."""
    w2 = solver.w2
    sol = solver.solve(-E11, tol=tol, max_iter=max_iter, source=lambda phi: nonlinear_term(w2, phi))
    return sol


def outer_tail(strip, field, delta):
    """max |field| at |s| ≥ δ/ε, the magnitude dropped by neglecting the exterior problem."""
    s = np.abs(strip.x[:, None] / strip.beta[None, :])
    mask = s >= delta / strip.epsilon
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(np.broadcast_to(field, s.shape)[mask])))


def mode_bounds(strip, phi, h):
    """Per mode k: (1 + ε⁴k⁴/ℓ̃⁴)‖φ_k‖² / ‖h_k‖²."""
    pk = np.fft.rfft(phi, axis=1)
    hk = np.fft.rfft(h, axis=1)
    k = np.arange(pk.shape[1])
    r = strip.epsilon / strip.ell_tilde
    num = (1.0 + r**4 * k**4) * strip.integrate_x(np.abs(pk) ** 2)
    den = strip.integrate_x(np.abs(hk) ** 2)
    out = np.full(k.size, np.nan)
    ok = den > 1e-24 * max(float(np.max(den)), 1e-300)
    out[ok] = num[ok] / den[ok]
    return out
