"""Independent radial solver for ring solutions of −ε²Δu + (1 + ε²W(r))u − u³ = 0 in the plane."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicSpline

from .errors import GeometryMismatch, NonConvergence
from .geometry import Circle
from .numerics import simpson_weights


def _radial_stencils(n, h):
    """Fourth-order d/dr and d²/dr² on r_i = (i − ½)h, i = 1..n, with u even about r = 0 and zero past r_n."""
    c1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    mats = []
    for c in (c1, c2):
        rows, cols, vals = [], [], []
        for i in range(n):
            for off, coef in zip(range(-2, 3), c):
                j = i + off
                if j < 0:
                    j = -j - 1  # mirror: node −k sits at r = −r_{k}
                if j >= n or coef == 0.0:
                    continue
                rows.append(i)
                cols.append(j)
                vals.append(coef)
        mats.append(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)))
    return mats


@dataclass
class RadialSolution:
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    epsilon: float
    potential_values: np.ndarray
    residual: float
    iterations: int

    @property
    def h(self):
        return float(self.r[1] - self.r[0])

    @property
    def r_max(self):
        return float(self.r[-1] + 0.5 * self.h)

    @property
    def mass(self):
        """∫|u|² over the plane."""
        w = np.full(self.r.size, self.h)
        return float(2.0 * np.pi * np.sum(w * self.u**2 * self.r))

    @property
    def peak(self):
        """Peak radius and height from a quadratic fit through the three largest samples."""
        i = int(np.argmax(self.u))
        if i == 0 or i == self.r.size - 1:
            return float(self.r[i]), float(self.u[i])
        y0, y1, y2 = self.u[i - 1 : i + 2]
        den = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        return float(self.r[i] + shift * self.h), float(y1 - 0.25 * (y0 - y2) * shift)

    @property
    def r_peak(self):
        return self.peak[0]

    def a_value(self):
        return self.mass / self.epsilon**2

    def spline(self):
        return CubicSpline(self.r, self.u)

    def as_table(self):
        return np.column_stack([self.r, self.u, self.du])


def solve_radial_gp(potential, epsilon, r_max, r0, eps2_scale=1.0, h=None, seed=None, tol=1e-11, max_iter=60):
    """Newton iteration for a ring concentrated near r₀.

    potential exposes of_r(r); eps2_scale multiplies it so that ε²W = eps2_scale·ε²·of_r. The seed
    is βU(β(r − r₀)/ε) unless an explicit seed array or callable is passed.
    """
    if not 0 < r0 < r_max:
        raise ValueError("seed radius must lie inside (0, r_max)")
    eps = float(epsilon)
    h = eps / 40.0 if h is None else float(h)
    n = int(np.ceil(r_max / h))
    r = (np.arange(1, n + 1) - 0.5) * h
    V = 1.0 + eps2_scale * eps**2 * potential.of_r(r)
    D1, D2 = _radial_stencils(n, h)
    lap = D2 + sp.diags(1.0 / r) @ D1
    if seed is None:
        beta = np.sqrt(1.0 + eps2_scale * eps**2 * float(potential.of_r(np.array(r0))))
        u = beta * np.sqrt(2.0) / np.cosh(beta * (r - r0) / eps)
    elif callable(seed):
        u = np.asarray(seed(r), dtype=float)
    else:
        u = np.asarray(seed, dtype=float)
    e2lap = eps**2 * lap
    res = np.inf
    for it in range(1, max_iter + 1):
        F = -(e2lap @ u) + V * u - u**3
        res = float(np.max(np.abs(F)))
        if res < tol:
            break
        J = (-e2lap + sp.diags(V - 3.0 * u**2)).tocsc()
        step = spla.spsolve(J, -F)
        if not np.all(np.isfinite(step)):
            raise NonConvergence("radial Newton produced a non-finite step")
        # backtracking on the residual norm; the near-translation mode makes raw steps long
        base = np.linalg.norm(F)
        lam = 1.0
        while lam > 1e-4:
            trial = u + lam * step
            if np.linalg.norm(-(e2lap @ trial) + V * trial - trial**3) < (1.0 - 1e-4 * lam) * base:
                break
            lam *= 0.5
        u = trial
    else:
        raise NonConvergence("radial Newton stalled at residual %.3e after %d steps" % (res, max_iter))
    if np.max(u) < 0.5:
        raise NonConvergence("radial Newton collapsed to the trivial state")
    return RadialSolution(r, u, D1 @ u, eps, V - 1.0, res, it)


def solve_radial_for_scenario(scenario, r0=None, r_max=None, **kw):
    geom_curve = scenario.curve
    if not isinstance(geom_curve, Circle) or not getattr(scenario.potential, "radial", False):
        raise GeometryMismatch("the radial oracle needs a circle and a radial potential")
    if np.linalg.norm(np.asarray(geom_curve.center) - np.asarray(scenario.potential.center)) > 1e-12:
        raise GeometryMismatch("circle and potential must share their centre")
    eps = scenario.epsilon
    R = geom_curve.radius
    r0 = R if r0 is None else r0
    r_max = R + max(2.0, 45.0 * eps) if r_max is None else r_max
    return solve_radial_gp(scenario.potential, eps, r_max, r0, **kw)


def continuation(scenarios, **kw):
    """Solve a family ordered by decreasing ε, seeding each at the previous peak radius."""
    out = []
    r0 = None
    for sc in sorted(scenarios, key=lambda s: -s.epsilon):
        sol = solve_radial_for_scenario(sc, r0=r0, **kw)
        out.append(sol)
        r0 = sol.r_peak
    return out


def compare_with_ansatz(radial, field, tau_index=0):
    """Map w₂ on the strip to radial samples u_ans(r) = βw₂(β(r − R)/ε − f, τ) and compare."""
    strip = field.strip
    geom = strip.geometry
    curve = geom.curve
    if not isinstance(curve, Circle):
        raise GeometryMismatch("comparison needs a circle scenario")
    if abs(strip.epsilon - radial.epsilon) > 1e-15:
        raise GeometryMismatch("oracle and ansatz were built at different ε")
    beta = float(strip.beta[tau_index])
    f = float(field.modulation.f[tau_index])
    x = beta * (radial.r - curve.radius) / strip.epsilon - f
    prof = strip.profile
    inside = np.abs(x) <= prof.grid.x_max
    w = np.zeros_like(radial.r)
    w[inside] = CubicSpline(prof.x, field.w2[:, tau_index])(x[inside])
    u_ans = beta * w
    diff = radial.u - u_ans
    r_pk, u_pk = radial.peak
    return {
        "epsilon": strip.epsilon,
        "sup_difference": float(np.max(np.abs(diff))),
        "l2_difference": float(np.sqrt(np.sum(diff**2 * radial.r) * radial.h * 2.0 * np.pi)),
        "profile_ratio": u_pk / (beta * float(prof.U[prof.x.size // 2])),
        "r_peak": r_pk,
        "curve_radius": float(curve.radius),
    }


def fermi_samples(radial, radius, M, n_theta=8):
    """The radial solution as a field u(t, θ) on an odd Simpson grid of oracle nodes with |t| ≤ M."""
    t = radial.r - radius
    idx = np.nonzero(np.abs(t) <= M)[0]
    if idx.size % 2 == 0:
        idx = idx[:-1]
    t = t[idx]
    u = np.repeat(radial.u[idx, None], n_theta, axis=1)
    ut = np.repeat(radial.du[idx, None], n_theta, axis=1)
    return t, u, ut, simpson_weights(idx.size, radial.h)
