import json

import numpy as np
import pytest

from gpcurve.errors import ArtifactIOError, ConfigError, NotStationary
from gpcurve.geometry import Circle, Ellipse, FourierCurve
from gpcurve.scenario import REFERENCE_RING, build_scenario, load_config, reference_scenario, stationary_radii


def test_reference_ring_radii():
    sc = reference_scenario(0.05)
    roots = stationary_radii(sc.potential, 0.05)
    assert len(roots) == 2
    assert roots[0] == pytest.approx(4.0605, abs=1e-4)
    assert sc.curve.radius == pytest.approx(5.500663561587885, abs=1e-10)
    assert sc.geometry().ell_tilde == pytest.approx(34.9087812203, abs=1e-8)


def test_scaled_potential_makes_length_epsilon_independent():
    a = reference_scenario(0.1).geometry().ell_tilde
    b = reference_scenario(0.025).geometry().ell_tilde
    assert a == pytest.approx(b, abs=1e-10)


def test_inner_root_and_other_curves():
    cfg = dict(REFERENCE_RING, curve={"kind": "circle", "radius": "stationary", "root": "inner"})
    assert build_scenario(cfg).curve.radius == pytest.approx(4.0605, abs=1e-4)
    ell = build_scenario({"curve": {"kind": "ellipse", "a": 3, "b": 2}, "potential": {"kind": "constant"}, "epsilon": 0.1})
    assert isinstance(ell.curve, Ellipse)
    th = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    pts = np.column_stack([2 * np.cos(th), np.sin(th)]).tolist()
    fc = build_scenario({"curve": {"kind": "fourier", "points": pts}, "potential": {"kind": "radial_polynomial", "coefficients": [0, 0, 1]}, "epsilon": 0.1})
    assert isinstance(fc.curve, FourierCurve)


@pytest.mark.parametrize(
    "cfg",
    [
        [],
        {"curve": {"kind": "circle", "radius": 1}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": 1}, "potential": {"kind": "constant"}, "epsilon": 1.5},
        {"curve": {"kind": "circle", "radius": -1}, "potential": {"kind": "constant"}, "epsilon": 0.1},
        {"curve": {"kind": "square"}, "potential": {"kind": "constant"}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": 1}, "potential": {"kind": "magic"}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": 1}, "potential": {"kind": "expression", "expr": "x**"}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": 1}, "potential": {"kind": "constant", "scale": "cubic"}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": 1}, "potential": {"kind": "gaussian_ring", "amplitude": 1, "r0": 1, "width": 0}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": "stationary", "root": 7}, "potential": REFERENCE_RING["potential"], "epsilon": 0.05},
        {"curve": {"kind": "fourier", "points": [[0, 0]]}, "potential": {"kind": "constant"}, "epsilon": 0.1},
        {"curve": {"kind": "circle", "radius": 1}, "potential": {"kind": "constant"}, "epsilon": "small"},
    ],
)
def test_bad_configs_raise_config_error(cfg):
    with pytest.raises(ConfigError):
        build_scenario(cfg)


def test_missing_stationary_circle():
    cfg = {"curve": {"kind": "circle", "radius": "stationary"}, "potential": {"kind": "constant", "value": 1.0}, "epsilon": 0.1}
    with pytest.raises(NotStationary):
        build_scenario(cfg)


def test_load_config_errors(tmp_path):
    with pytest.raises(ArtifactIOError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    good = tmp_path / "good.json"
    good.write_text(json.dumps(REFERENCE_RING))
    assert load_config(str(good)) == REFERENCE_RING


def test_with_epsilon_keeps_config():
    sc = reference_scenario(0.05).with_epsilon(0.02)
    assert sc.epsilon == 0.02 and sc.name == "reference_ring"
    assert isinstance(sc.curve, Circle)
