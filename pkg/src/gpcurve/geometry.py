"""Closed curves, trap potentials, Fermi coordinates and the weight/Liouville data of a tube."""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb

import numpy as np
import sympy
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import brentq

from .errors import ConfigError, OutsideTube
from .numerics import periodic_antiderivative, periodic_eval

MAX_ORDER = 4


def _rot_outer(tangent):
    # outer normal of a positively oriented curve: tangent rotated clockwise
    return np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)


@dataclass
class Frame:
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    dkappa: np.ndarray


class Curve:
    """Positively oriented closed curve parameterized by arclength on [0, length)."""

    length: float

    def frame(self, theta):
        raise NotImplementedError

    def point(self, theta):
        return self.frame(theta).point

    def curvature(self, theta):
        return self.frame(theta).kappa

    def sample(self, n=512):
        theta = np.arange(n) * self.length / n
        return theta, self.frame(theta)

    @cached_property
    def curvature_bound(self):
        _, fr = self.sample(1024)
        return float(max(np.max(np.abs(fr.kappa)), np.max(np.abs(fr.dkappa))))

    def turning(self, n=1024):
        theta, fr = self.sample(n)
        return float(np.sum(fr.kappa) * self.length / n)


class Circle(Curve):
    def __init__(self, radius, center=(0.0, 0.0)):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.length = 2.0 * np.pi * self.radius

    def frame(self, theta):
        theta = np.asarray(theta, dtype=float)
        ang = theta / self.radius
        radial = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        tangent = np.stack([-np.sin(ang), np.cos(ang)], axis=-1)
        kappa = np.full(theta.shape, 1.0 / self.radius)
        return Frame(self.center + self.radius * radial, tangent, radial, kappa, np.zeros(theta.shape))


class ParametricCurve(Curve):
    """A closed curve given by a 2π-periodic map P(φ); reparameterized to arclength numerically."""

    n_arc = 1024

    def derivatives(self, phi):
        """Return P, P', P'', P''' at phi, each of shape phi.shape + (2,)."""
        raise NotImplementedError

    @cached_property
    def _arc(self):
        phi = np.arange(self.n_arc) * 2.0 * np.pi / self.n_arc
        _, d1, _, _ = self.derivatives(phi)
        speed = np.hypot(d1[:, 0], d1[:, 1])
        cross = d1[:, 0] * np.roll(d1[:, 1], -1) - d1[:, 1] * np.roll(d1[:, 0], -1)
        if np.sum(cross) < 0:
            raise ConfigError("curve must be positively oriented")
        length = float(np.mean(speed) * 2.0 * np.pi)
        return speed, length

    @property
    def length(self):
        return self._arc[1]

    def arclength(self, phi):
        speed, _ = self._arc
        return periodic_antiderivative(speed, 2.0 * np.pi, phi)

    def parameter(self, theta):
        """Invert the arclength function by Newton's method."""
        speed, length = self._arc
        theta = np.asarray(theta, dtype=float)
        phi = 2.0 * np.pi * theta / length
        for _ in range(60):
            err = self.arclength(phi) - theta
            phi = phi - err / periodic_eval(speed, 2.0 * np.pi, phi)
            if np.max(np.abs(err), initial=0.0) < 1e-13 * max(1.0, length):
                break
        return phi

    def frame(self, theta):
        theta = np.asarray(theta, dtype=float)
        phi = self.parameter(np.mod(theta, self.length))
        p, d1, d2, d3 = self.derivatives(phi)
        speed = np.hypot(d1[..., 0], d1[..., 1])
        tangent = d1 / speed[..., None]
        c12 = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        c13 = d1[..., 0] * d3[..., 1] - d1[..., 1] * d3[..., 0]
        dot12 = np.sum(d1 * d2, axis=-1)
        kappa = c12 / speed**3
        dkappa_dphi = (c13 * speed**2 - 3.0 * c12 * dot12) / speed**5
        return Frame(p, tangent, _rot_outer(tangent), kappa, dkappa_dphi / speed)


class Ellipse(ParametricCurve):
    def __init__(self, a, b, center=(0.0, 0.0)):
        if a <= 0 or b <= 0:
            raise ValueError("semi-axes must be positive")
        self.a, self.b = float(a), float(b)
        self.center = np.asarray(center, dtype=float)

    def derivatives(self, phi):
        c, s = np.cos(phi), np.sin(phi)
        a, b = self.a, self.b
        p = self.center + np.stack([a * c, b * s], axis=-1)
        return (
            p,
            np.stack([-a * s, b * c], axis=-1),
            np.stack([-a * c, -b * s], axis=-1),
            np.stack([a * s, -b * c], axis=-1),
        )


class FourierCurve(ParametricCurve):
    """Trigonometric interpolant of equally spaced samples of a closed curve."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 8:
            raise ConfigError("curve samples must be an (m, 2) array with m >= 8")
        area = 0.5 * np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - pts[:, 1] * np.roll(pts[:, 0], -1))
        if area < 0:
            pts = pts[::-1]
        m = pts.shape[0]
        self.coef = np.fft.rfft(pts, axis=0) / m
        if m % 2 == 0:
            self.coef[-1] *= 0.5
        self.modes = np.arange(self.coef.shape[0])

    def derivatives(self, phi):
        phi = np.asarray(phi, dtype=float)
        phase = np.exp(1j * np.multiply.outer(phi, self.modes))
        w = np.full(self.modes.size, 2.0)
        w[0] = 1.0
        out = []
        for order in range(4):
            mult = (1j * self.modes) ** order * w
            out.append(np.real(np.einsum("...k,kd->...d", phase, self.coef * mult[:, None])))
        return tuple(out)


class Potential:
    """Scalar trap potential W(y) on the plane with partial derivatives up to order four."""

    radial = False

    def partials(self, y1, y2):
        """Dict mapping (a, b) to the samples of ∂₁^a ∂₂^b W, for a + b <= 4."""
        raise NotImplementedError

    def __call__(self, y1, y2):
        return self.partials(y1, y2)[(0, 0)]

    def first_partials(self, y1, y2):
        """Value and gradient only; subclasses override when that is cheaper."""
        p = self.partials(y1, y2)
        return {k: p[k] for k in ((0, 0), (1, 0), (0, 1))}


_X, _Y = sympy.symbols("x y", real=True)
_R = sympy.symbols("r", positive=True)


@lru_cache(maxsize=64)
def _cartesian_partials(expr):
    funcs = {}
    for a in range(MAX_ORDER + 1):
        for b in range(MAX_ORDER + 1 - a):
            d = expr
            if a:
                d = sympy.diff(d, _X, a)
            if b:
                d = sympy.diff(d, _Y, b)
            funcs[(a, b)] = sympy.lambdify((_X, _Y), d, "numpy")
    return funcs


@lru_cache(maxsize=64)
def _radial_derivatives(expr):
    return tuple(sympy.lambdify(_R, sympy.diff(expr, _R, k), "numpy") for k in range(MAX_ORDER + 1))


class ExpressionPotential(Potential):
    """Potential scale·expr(x, y) for a symbolic expression in the plane coordinates.

    Derivatives are generated once per expression and shared, so rescaling (for instance by
    1/ε² across an ε sweep) costs nothing.
    """

    def __init__(self, expr, scale=1.0):
        if isinstance(expr, str):
            expr = sympy.sympify(expr, locals={"x": _X, "y": _Y})
        self.expr = expr
        self.scale = float(scale)
        self._funcs = _cartesian_partials(expr)

    def _eval(self, keys, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        shape = np.broadcast(y1, y2).shape
        return {k: self.scale * np.broadcast_to(self._funcs[k](y1, y2), shape).astype(float) for k in keys}

    def partials(self, y1, y2):
        return self._eval(self._funcs.keys(), y1, y2)

    def first_partials(self, y1, y2):
        return self._eval(((0, 0), (1, 0), (0, 1)), y1, y2)


class RadialPotential(ExpressionPotential):
    """W = scale·g(|y - center|) for a symbolic profile g(r); keeps g and its r-derivatives for radial solvers."""

    radial = True

    def __init__(self, profile_expr, center=(0.0, 0.0), scale=1.0):
        if isinstance(profile_expr, str):
            profile_expr = sympy.sympify(profile_expr, locals={"r": _R})
        self.center = np.asarray(center, dtype=float)
        self.profile_expr = profile_expr
        self._radial = _radial_derivatives(profile_expr)
        rr = sympy.sqrt((_X - sympy.Float(self.center[0])) ** 2 + (_Y - sympy.Float(self.center[1])) ** 2)
        super().__init__(profile_expr.subs(_R, rr), scale)

    def of_r(self, r, order=0):
        r = np.asarray(r, dtype=float)
        return self.scale * np.broadcast_to(self._radial[order](r), r.shape).astype(float)


def constant_potential(value=0.0, scale=1.0):
    return RadialPotential(sympy.Float(value), scale=scale)


def gaussian_ring(amplitude, r0, width, center=(0.0, 0.0), scale=1.0):
    expr = sympy.Float(amplitude) * sympy.exp(-((_R - sympy.Float(r0)) ** 2) / sympy.Float(width) ** 2)
    return RadialPotential(expr, center, scale)


def radial_polynomial(coefficients, center=(0.0, 0.0), scale=1.0):
    expr = sum(sympy.Float(c) * _R**k for k, c in enumerate(coefficients))
    return RadialPotential(sympy.sympify(expr), center, scale)


class SampledPotential(Potential):
    """Potential sampled on a rectangular grid, differentiated through a quintic spline."""

    def __init__(self, xs, ys, values):
        self.spline = RectBivariateSpline(np.asarray(xs), np.asarray(ys), np.asarray(values), kx=5, ky=5)

    def partials(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        shape = np.broadcast(y1, y2).shape
        a1 = np.broadcast_to(y1, shape).ravel()
        a2 = np.broadcast_to(y2, shape).ravel()
        out = {}
        for a in range(MAX_ORDER + 1):
            for b in range(MAX_ORDER + 1 - a):
                out[(a, b)] = self.spline.ev(a1, a2, dx=a, dy=b).reshape(shape)
        return out


def directional(partials, direction, order):
    """order-th derivative of W along a fixed direction, from its partials."""
    d1, d2 = direction[..., 0], direction[..., 1]
    total = 0.0
    for i in range(order + 1):
        total = total + comb(order, i) * d1**i * d2 ** (order - i) * partials[(i, order - i)]
    return total


def _multilinear(partials, vectors):
    """Symmetric derivative tensor of W contracted with the given list of vectors."""
    order = len(vectors)
    total = 0.0
    # expand over all index choices; orders here are at most three
    for idx in np.ndindex(*([2] * order)):
        a = sum(1 for i in idx if i == 0)
        coef = 1.0
        for v, i in zip(vectors, idx):
            coef = coef * v[..., i]
        total = total + coef * partials[(a, order - a)]
    return total


@dataclass
class Traces:
    theta: np.ndarray
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    dkappa: np.ndarray
    W0: np.ndarray
    Wt: np.ndarray
    Wtt: np.ndarray
    Wttt: np.ndarray
    Wtttt: np.ndarray
    Wth: np.ndarray
    Wthth: np.ndarray
    Wththth: np.ndarray
    beta: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray


def beta_derivatives(eps2, W0, Wth, Wthth, Wththth):
    """β = (1 + ε²W)^(1/2) and its first three θ-derivatives in closed form."""
    beta = np.sqrt(1.0 + eps2 * W0)
    b1 = eps2 * Wth / (2.0 * beta)
    b2 = eps2 * Wthth / (2.0 * beta) - eps2**2 * Wth**2 / (4.0 * beta**3)
    b3 = (
        eps2 * Wththth / (2.0 * beta)
        - 3.0 * eps2**2 * Wthth * Wth / (4.0 * beta**3)
        + 3.0 * eps2**3 * Wth**3 / (8.0 * beta**5)
    )
    return beta, b1, b2, b3


@dataclass(frozen=True)
class ScaleParams:
    epsilon: float
    a: float = float("nan")
    alpha: float = 0.2
    varrho: float = 0.7
    delta: float = 0.1
    M0: float = 0.5
    C0: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if not (0 < self.alpha < 1 and 0 < self.varrho < 1):
            raise ConfigError("alpha and varrho must lie in (0, 1)")
        if self.varrho <= 1.0 / 3.0 + 4.0 * self.alpha / 3.0:
            raise ConfigError("varrho must exceed 1/3 + 4 alpha / 3")
        if self.C0 * self.M0 >= 1:
            raise ConfigError("tube half-width M0 must satisfy C0 M0 < 1")

    @property
    def budget_f(self):
        return self.epsilon ** (1.0 - self.alpha)

    @property
    def budget_e(self):
        return self.epsilon ** (1.5 * self.varrho + 0.5 - 2.0 * self.alpha)


class TubeGeometry:
    """A curve with a potential at scale ε: weight β, weighted length and the Liouville map."""

    def __init__(self, curve, potential, epsilon, n_quad=512):
        if epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        self.curve = curve
        self.potential = potential
        self.epsilon = float(epsilon)
        self.n_quad = int(n_quad)
        self.length = curve.length
        self.C0 = curve.curvature_bound
        self.M0 = 0.5 / self.C0 if self.C0 > 0 else np.inf
        self.theta_nodes = np.arange(self.n_quad) * self.length / self.n_quad
        self.nodes = self.traces(self.theta_nodes)
        self.ell_tilde = float(np.mean(self.nodes.beta) * self.length)

    @property
    def eps2(self):
        return self.epsilon**2

    def traces(self, theta):
        theta = np.asarray(theta, dtype=float)
        fr = self.curve.frame(theta)
        p = self.potential.partials(fr.point[..., 0], fr.point[..., 1])
        nu = fr.normal
        inward = -nu
        g2 = fr.kappa[..., None] * inward
        g3 = fr.dkappa[..., None] * inward - (fr.kappa**2)[..., None] * fr.tangent
        T = fr.tangent
        W0 = p[(0, 0)]
        Wth = _multilinear(p, [T])
        Wthth = _multilinear(p, [T, T]) + _multilinear(p, [g2])
        Wththth = _multilinear(p, [T, T, T]) + 3.0 * _multilinear(p, [T, g2]) + _multilinear(p, [g3])
        beta, b1, b2, b3 = beta_derivatives(self.eps2, W0, Wth, Wthth, Wththth)
        return Traces(
            theta=theta,
            point=fr.point,
            tangent=T,
            normal=nu,
            kappa=fr.kappa,
            dkappa=fr.dkappa,
            W0=W0,
            Wt=directional(p, nu, 1),
            Wtt=directional(p, nu, 2),
            Wttt=directional(p, nu, 3),
            Wtttt=directional(p, nu, 4),
            Wth=Wth,
            Wthth=Wthth,
            Wththth=Wththth,
            beta=beta,
            beta1=b1,
            beta2=b2,
            beta3=b3,
        )

    def potential_along_normals(self, t, theta):
        """W(γ(θ) + tν(θ)) and its normal derivative, for broadcastable t and θ."""
        t, theta = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(theta, dtype=float))
        # strip grids repeat each θ along x, so evaluate the frame once per distinct value
        th_u, inv = np.unique(theta, return_inverse=True)
        fr = self.curve.frame(th_u)
        point = fr.point[inv.reshape(theta.shape)]
        normal = fr.normal[inv.reshape(theta.shape)]
        pts = point + t[..., None] * normal
        p = self.potential.first_partials(pts[..., 0], pts[..., 1])
        return p[(0, 0)], directional(p, normal, 1)

    # Liouville map

    def liouville(self, theta):
        """τ(θ) = (2π/ℓ̃) ∫_0^θ β."""
        theta = np.asarray(theta, dtype=float)
        whole, rest = np.divmod(theta, self.length)
        partial = periodic_antiderivative(self.nodes.beta, self.length, rest)
        return 2.0 * np.pi * whole + 2.0 * np.pi * partial / self.ell_tilde

    def dtau_dtheta(self, theta):
        beta = periodic_eval(self.nodes.beta, self.length, theta)
        return 2.0 * np.pi * beta / self.ell_tilde

    def liouville_inverse(self, tau):
        tau = np.asarray(tau, dtype=float)
        whole, rest = np.divmod(tau, 2.0 * np.pi)
        theta = rest * self.length / (2.0 * np.pi)
        for _ in range(50):
            err = self.liouville(theta) - rest
            theta = theta - err / self.dtau_dtheta(theta)
            if np.max(np.abs(err), initial=0.0) < 1e-13:
                break
        else:
            theta = np.array([brentq(lambda s, r=r: float(self.liouville(s)) - r, 0.0, self.length, xtol=1e-12) for r in np.ravel(rest)]).reshape(rest.shape)
        return theta + whole * self.length

    # Fermi coordinates

    def fermi_map(self, t, theta):
        fr = self.curve.frame(np.asarray(theta, dtype=float))
        return fr.point + np.asarray(t, dtype=float)[..., None] * fr.normal

    def fermi_unmap(self, points, M=None):
        """Recover (t, θ) for points within distance M (default M0) of the curve."""
        M = self.M0 if M is None else M
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cand, fr = self.curve.sample(2048)
        diff = pts[:, None, :] - fr.point[None, :, :]
        theta = cand[np.argmin(np.sum(diff**2, axis=-1), axis=1)]
        for _ in range(60):
            f = self.curve.frame(theta)
            rel = pts - f.point
            g = np.sum(rel * f.tangent, axis=-1)
            t = np.sum(rel * f.normal, axis=-1)
            step = g / (1.0 + f.kappa * t)
            theta = theta + step
            if np.max(np.abs(step)) < 1e-14 * max(1.0, self.length):
                break
        theta = np.mod(theta, self.length)
        f = self.curve.frame(theta)
        t = np.sum((pts - f.point) * f.normal, axis=-1)
        if np.any(np.abs(t) >= M):
            raise OutsideTube("point at normal distance %.3g exceeds tube half-width %.3g" % (np.max(np.abs(t)), M))
        return t, theta
