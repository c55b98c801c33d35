import math

import numpy as np
import pytest

import finsler


def random_tangent(rng, x):
    v = rng.normal(size=x.size)
    return v - x * (x @ v)


def test_registry_and_schema():
    names = {m["name"] for m in finsler.models()}
    assert {"round", "randers-nav", "bao-shen", "flat-randers"} <= names
    schema = finsler.schema()
    assert set(schema["suite"]["enum"]) == set(finsler.SUITES)


def test_round_sphere_norm_and_distance():
    m = finsler.Model("round", n=2, k=1.0)
    assert m.dimension == 2
    x = np.array([0.0, 0.0, 1.0])
    assert m.F(x, [0.3, 0.4, 0.0]) == pytest.approx(0.5, abs=1e-12)
    assert m.distance(x, -x) == pytest.approx(math.pi, rel=5e-3)
    y = np.array([1.0, 0.0, 0.0])
    assert m.distance(x, y) == pytest.approx(math.pi / 2, abs=1e-8)


def test_randers_zermelo_relation():
    # y / F(y) - W has unit round length, W = a (e3 x X).
    a = 0.3
    m = finsler.Model("randers-nav", n=2, k=1.0, wind="rotation", a=a)
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        y = random_tangent(rng, x)
        w = a * np.cross([0.0, 0.0, 1.0], x)
        assert np.linalg.norm(y / m.F(x, y) - w) == pytest.approx(1.0, abs=1e-9)
        assert abs(m.F(x, y) - m.F(x, -y)) > 0.0 or abs(w @ y) < 1e-12


def test_randers_curvature_and_s():
    m = finsler.Model("randers-nav", n=2, wind="rotation", a=0.3)
    rng = np.random.default_rng(2)
    for _ in range(3):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        V, W = random_tangent(rng, x), random_tangent(rng, x)
        assert m.flag_curvature(x, V, W) == pytest.approx(1.0, abs=1e-6)
        assert abs(m.s_curvature(x, V)) < 1e-6
    assert m.volume() == pytest.approx(4 * math.pi, rel=1e-6)


def test_verify_suite():
    report = finsler.verify({"model": "round", "n": 2}, suite="curvature", seed=3)
    assert report["failed"] == 0
    assert report["passed"] == len(report["records"]) > 0
    for rec in report["records"]:
        assert {"check_id", "anchor", "measured", "expected", "tolerance", "pass"} <= rec.keys()


def test_errors():
    with pytest.raises(finsler.ConfigError):
        finsler.Model("nonexistent")
    with pytest.raises(ValueError):
        finsler.verify("round", suite="everything")
    with pytest.raises(finsler.ConfigError, match="unit"):
        finsler.Model("randers-nav", a=1.5)
    with pytest.raises(finsler.FinslerError):
        finsler.Model("flat-randers").volume()
    m = finsler.Model("round")
    with pytest.raises(ValueError):
        m.F([1.0, 0.0], [0.0, 1.0])


def test_plot_data():
    csv = finsler.plot_data("indicatrix", "flat-randers")
    lines = csv.strip().splitlines()
    assert lines[0] == "theta,y1,y2"
    assert len(lines) == 65
    for line in lines[1:]:
        _, y1, y2 = map(float, line.split(","))
        assert math.hypot(y1 - 0.5, y2) == pytest.approx(1.0, abs=1e-9)
