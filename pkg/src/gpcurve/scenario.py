"""JSON scenario configs turned into curves, potentials and tube geometries."""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import geometry as geo
from .errors import ArtifactIOError, ConfigError, NotStationary

CURVE_KINDS = ("circle", "ellipse", "fourier")
POTENTIAL_KINDS = ("constant", "gaussian_ring", "radial_polynomial", "expression")

REFERENCE_RING = {
    "name": "reference_ring",
    "curve": {"kind": "circle", "radius": "stationary", "root": "outer"},
    "potential": {"kind": "gaussian_ring", "amplitude": 2.0, "r0": 4.0, "width": 0.7, "scale": "inverse_epsilon_squared"},
    "epsilon": 0.05,
    "gap_c": 0.01,
    "c2_hat": 1.0,
    "alpha": 0.2,
    "varrho": 0.7,
}


@dataclass
class Scenario:
    config: dict
    epsilon: float
    curve: geo.Curve
    potential: geo.Potential
    gap_c: float = 0.01
    c2_hat: float = 1.0
    alpha: float = 0.2
    varrho: float = 0.7
    delta: float = 0.1
    a: float | None = None
    seed: int = 0
    numerics: dict = field(default_factory=dict)

    def geometry(self, n_quad=512):
        return geo.TubeGeometry(self.curve, self.potential, self.epsilon, n_quad=n_quad)

    def with_epsilon(self, epsilon):
        cfg = dict(self.config)
        cfg["epsilon"] = float(epsilon)
        return build_scenario(cfg)

    @property
    def name(self):
        return self.config.get("name", "scenario")


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ArtifactIOError("cannot read config %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc)) from exc


def _num(cfg, key, default=None, positive=False):
    val = cfg.get(key, default)
    if val is None:
        raise ConfigError("missing field %r" % key)
    try:
        val = float(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError("field %r must be a number" % key) from exc
    if positive and not val > 0:
        raise ConfigError("field %r must be positive" % key)
    return val


def build_potential(cfg, epsilon):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("potential needs a 'kind'")
    kind = cfg["kind"]
    scale = cfg.get("scale", "none")
    if scale not in ("none", "inverse_epsilon_squared"):
        raise ConfigError("potential scale must be 'none' or 'inverse_epsilon_squared'")
    factor = 1.0 / epsilon**2 if scale == "inverse_epsilon_squared" else 1.0
    center = tuple(cfg.get("center", (0.0, 0.0)))
    if kind == "constant":
        return geo.constant_potential(_num(cfg, "value", 0.0), scale=factor)
    if kind == "gaussian_ring":
        return geo.gaussian_ring(_num(cfg, "amplitude"), _num(cfg, "r0"), _num(cfg, "width", positive=True), center, factor)
    if kind == "radial_polynomial":
        coeffs = cfg.get("coefficients")
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("radial_polynomial needs a non-empty coefficient list")
        return geo.radial_polynomial([float(c) for c in coeffs], center, factor)
    if kind == "expression":
        if not isinstance(cfg.get("expr"), str):
            raise ConfigError("expression potential needs an 'expr' string in x, y")
        import sympy

        try:
            return geo.ExpressionPotential(cfg["expr"], factor)
        except (sympy.SympifyError, TypeError) as exc:
            raise ConfigError("cannot parse potential expression %r" % cfg["expr"]) from exc
    raise ConfigError("unknown potential kind %r (expected one of %s)" % (kind, ", ".join(POTENTIAL_KINDS)))


def radial_stationarity(potential, epsilon, r):
    """(1 + ε²g) + (3/2) r ε² g' for a circle of radius r about the potential centre; zero when stationary."""
    e2 = epsilon**2
    return 1.0 + e2 * potential.of_r(r) + 1.5 * r * e2 * potential.of_r(r, 1)


def stationary_radii(potential, epsilon, r_min=0.05, r_max=50.0, n=4000):
    if not getattr(potential, "radial", False):
        raise ConfigError("stationary radius search needs a radial potential")
    r = np.linspace(r_min, r_max, n)
    g = radial_stationarity(potential, epsilon, r)
    roots = []
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        roots.append(brentq(lambda s: float(radial_stationarity(potential, epsilon, s)), r[i], r[i + 1], xtol=1e-14, rtol=1e-15))
    return roots


def build_curve(cfg, potential, epsilon):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("curve needs a 'kind'")
    kind = cfg["kind"]
    if kind == "circle":
        radius = cfg.get("radius")
        center = tuple(cfg.get("center", getattr(potential, "center", (0.0, 0.0))))
        if radius == "stationary":
            roots = stationary_radii(potential, epsilon)
            if not roots:
                raise NotStationary("no stationary circle for this potential")
            which = cfg.get("root", "outer")
            if which == "outer":
                radius = roots[-1]
            elif which == "inner":
                radius = roots[0]
            elif isinstance(which, int) and 0 <= which < len(roots):
                radius = roots[which]
            else:
                raise ConfigError("circle root must be 'outer', 'inner' or a valid index")
        else:
            radius = _num(cfg, "radius", positive=True)
        return geo.Circle(radius, center)
    if kind == "ellipse":
        return geo.Ellipse(_num(cfg, "a", positive=True), _num(cfg, "b", positive=True), tuple(cfg.get("center", (0.0, 0.0))))
    if kind == "fourier":
        pts = np.asarray(cfg.get("points", []), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 5:
            raise ConfigError("fourier curve needs at least five [x, y] points")
        return geo.FourierCurve(pts)
    raise ConfigError("unknown curve kind %r (expected one of %s)" % (kind, ", ".join(CURVE_KINDS)))


def build_scenario(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("curve", "potential", "epsilon"):
        if key not in cfg:
            raise ConfigError("config is missing %r" % key)
    eps = _num(cfg, "epsilon", positive=True)
    if eps >= 1:
        raise ConfigError("epsilon must be below 1")
    pot = build_potential(cfg["potential"], eps)
    curve = build_curve(cfg["curve"], pot, eps)
    a = cfg.get("a")
    return Scenario(
        config=cfg,
        epsilon=eps,
        curve=curve,
        potential=pot,
        gap_c=_num(cfg, "gap_c", 0.01, positive=True),
        c2_hat=_num(cfg, "c2_hat", 1.0, positive=True),
        alpha=_num(cfg, "alpha", 0.2, positive=True),
        varrho=_num(cfg, "varrho", 0.7, positive=True),
        delta=_num(cfg, "delta", 0.1, positive=True),
        a=None if a is None else _num(cfg, "a", positive=True),
        seed=int(cfg.get("seed", 0)),
        numerics=dict(cfg.get("numerics", {})),
    )


def reference_scenario(epsilon=0.05):
    cfg = json.loads(json.dumps(REFERENCE_RING))
    cfg["epsilon"] = float(epsilon)
    return build_scenario(cfg)
