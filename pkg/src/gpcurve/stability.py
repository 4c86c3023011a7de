"""Stationarity, the Jacobi operator spectrum and the two resonance gap conditions."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .errors import Degenerate


def stationarity_residual(geometry, theta=None):
    """κ(1 + ε²W) + (3/2) ε² W_t along the curve."""
    tr = geometry.nodes if theta is None else geometry.traces(theta)
    e2 = geometry.eps2
    return tr.kappa * (1.0 + e2 * tr.W0) + 1.5 * e2 * tr.Wt


def fourier_diff_matrix(n, period):
    """Spectral first-derivative matrix on n (odd) equally spaced periodic nodes."""
    if n % 2 == 0:
        raise ValueError("use an odd node count so the derivative matrix has no unresolved mode")
    h = 2.0 * np.pi / n
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore"):
        mat = 0.5 * (-1.0) ** diff / np.sin(diff * h / 2.0)
    mat[diff == 0] = 0.0
    return mat * (2.0 * np.pi / period)


def jacobi_coefficients(tr, eps2):
    """P = V^{3/2} and the zeroth-order coefficient Q, with V = 1 + ε²W(0, θ)."""
    V = 1.0 + eps2 * tr.W0
    P = V**1.5
    Vt = eps2 * tr.Wt
    Vtt = eps2 * tr.Wtt
    second = 1.5 * np.sqrt(V) * Vtt + 0.75 * Vt**2 / np.sqrt(V)
    Q = second - 2.0 * P * tr.kappa**2
    return P, Q


@dataclass
class JacobiSpectrum:
    theta: np.ndarray
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    residuals: np.ndarray
    operator: np.ndarray
    weight: np.ndarray

    @property
    def d_epsilon(self):
        return float(np.min(np.abs(self.eigenvalues)))

    def satisfies_nondegeneracy(self, epsilon, c2_hat=1.0, alpha=0.2):
        return self.d_epsilon >= max(1e-12, c2_hat * epsilon**alpha)


def jacobi_spectrum(geometry, j_max=None, n=257):
    """Eigenpairs of 𝔽h = βΛh with periodic conditions, ascending in |Λ|.

    Discretized by Fourier collocation in arclength; the matrix D·P·D − Q is symmetric,
    so the problem is a generalized symmetric eigenproblem with the diagonal weight β.
    """
    theta = np.arange(n) * geometry.length / n
    tr = geometry.traces(theta)
    P, Q = jacobi_coefficients(tr, geometry.eps2)
    D = fourier_diff_matrix(n, geometry.length)
    K = D @ (P[:, None] * D) - np.diag(Q)
    K = 0.5 * (K + K.T)
    vals, vecs = eigh(K, np.diag(tr.beta))
    vecs = vecs * np.sqrt(n / geometry.length)
    order = np.argsort(np.abs(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    if j_max is not None:
        vals, vecs = vals[:j_max], vecs[:, :j_max]
    res = np.max(np.abs(K @ vecs - vals * tr.beta[:, None] * vecs), axis=0) / np.max(np.abs(vecs), axis=0)
    if np.min(np.abs(vals)) < 1e-12:
        raise Degenerate("Jacobi operator has an eigenvalue %.3e in the periodic kernel" % vals[0])
    return JacobiSpectrum(theta, vals, vecs, res, K, tr.beta)


def lambda_star(lambda0):
    return lambda0 / (4.0 * np.pi**2)


@dataclass
class GapResult:
    passed: bool
    nearest_j: int
    margin: float


def _eps_gap_terms(j, ratio, lam_star, c):
    j = np.asarray(j, dtype=float)
    return np.abs(j**2 * ratio**2 - lam_star) - c * ratio


def check_gap_epsilon(epsilon, ell_tilde, lam_star, c):
    """Test |j²ε²/ℓ̃² − λ*| ≥ cε/ℓ̃ for every j ≥ 1.

    j²ε²/ℓ̃² is monotone in j, so only the integers around √λ*·ℓ̃/ε can come closest.
    """
    ratio = epsilon / ell_tilde
    centre = np.sqrt(lam_star) / ratio
    base = int(np.floor(centre))
    cand = np.arange(max(1, base - 2), base + 4)
    terms = _eps_gap_terms(cand, ratio, lam_star, c)
    k = int(np.argmin(terms))
    return GapResult(bool(np.all(terms >= 0)), int(cand[k]), float(terms[k]))


def scan_gap_epsilon(epsilon, ell_tilde, lam_star, c, j_max=10**4):
    j = np.arange(1, j_max + 1)
    terms = _eps_gap_terms(j, epsilon / ell_tilde, lam_star, c)
    k = int(np.argmin(terms))
    return GapResult(bool(np.all(terms >= 0)), int(j[k]), float(terms[k]))


def _a_gap_terms(j, x, lam_star, c):
    j = np.asarray(j, dtype=float)
    return np.abs(x - np.sqrt(lam_star) / j) - 2.0 * c / j**2


def check_gap_a(a, c, rho0, lam_star):
    """Test that ϱ₀/a avoids every band [√λ*/j − 2c/j², √λ*/j + 2c/j²].

    With x = ϱ₀/a the forbidden j satisfy |x j² − √λ* j| ≤ 2c, a union of at most two
    integer intervals whose ends are the roots below; the candidates cover those ends.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    x = rho0 / a
    s = np.sqrt(lam_star)
    roots = [s / x]
    for sign in (1.0, -1.0):
        disc = s * s + sign * 8.0 * c * x
        if disc >= 0:
            roots += [(s + np.sqrt(disc)) / (2.0 * x), (s - np.sqrt(disc)) / (2.0 * x)]
    cand = {1}
    for r in roots:
        if np.isfinite(r) and r > -2:
            base = int(np.floor(r))
            cand.update(j for j in range(base - 1, base + 3) if j >= 1)
    cand = np.array(sorted(cand))
    terms = _a_gap_terms(cand, x, lam_star, c)
    k = int(np.argmin(terms))
    return GapResult(bool(np.all(terms > 0)), int(cand[k]), float(terms[k]))


def scan_gap_a(a, c, rho0, lam_star, j_max=10**4):
    j = np.arange(1, j_max + 1)
    terms = _a_gap_terms(j, rho0 / a, lam_star, c)
    k = int(np.argmin(terms))
    return GapResult(bool(np.all(terms > 0)), int(j[k]), float(terms[k]))
