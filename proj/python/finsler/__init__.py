"""Finsler model construction and numerical verification.

Points and tangent vectors are given in ambient coordinates (R^{n+1} for
spheres, R^n for the plane). Configs and reports are plain dicts.
"""

import json

from . import _finsler
from ._finsler import ConfigError, FinslerError

__all__ = [
    "ConfigError",
    "FinslerError",
    "Model",
    "model",
    "models",
    "plot_data",
    "schema",
    "verify",
]

SUITES = (
    "curvature",
    "s_curvature",
    "diameter",
    "laplacian_comparison",
    "eigen",
    "volume_comparison",
    "full",
)


class Model:
    """A constructed model; see models() for names and parameters."""

    def __init__(self, name, **params):
        self._impl = _finsler.Model(json.dumps({"model": name, **params}))

    name = property(lambda self: self._impl.name)
    dimension = property(lambda self: self._impl.dimension)
    model_sphere = property(lambda self: self._impl.model_sphere)

    @property
    def parameters(self):
        return json.loads(self._impl.parameters_json)

    def F(self, x, v):
        return self._impl.F(list(map(float, x)), list(map(float, v)))

    def flag_curvature(self, x, V, W):
        return self._impl.flag_curvature(list(map(float, x)), list(map(float, V)), list(map(float, W)))

    def ricci(self, x, V):
        return self._impl.ricci(list(map(float, x)), list(map(float, V)))

    def s_curvature(self, x, y):
        return self._impl.s_curvature(list(map(float, x)), list(map(float, y)))

    def distance(self, x, y):
        return self._impl.distance(list(map(float, x)), list(map(float, y)))

    def diameter(self, pairs=10, seed=1):
        return self._impl.diameter(pairs, seed)

    def volume(self):
        return self._impl.volume()

    def __repr__(self):
        impl = self.__dict__.get("_impl")
        return f"Model({impl.name!r}, {self.parameters})" if impl else "Model(<unbuilt>)"


def model(name, **params):
    return Model(name, **params)


def models():
    """Registered models with their parameter schemas."""
    return json.loads(_finsler.models_json())


def schema():
    """Config schema used by verify() and the command line tool."""
    return json.loads(_finsler.schema_json())


def _config(model_spec, suite, seed, samples, tolerances):
    if isinstance(model_spec, str):
        model_spec = {"model": model_spec}
    cfg = {"model": dict(model_spec), "suite": suite, "seed": seed}
    if samples:
        cfg["samples"] = dict(samples)
    if tolerances:
        cfg["tolerances"] = dict(tolerances)
    return json.dumps(cfg)


def verify(model_spec, suite="full", seed=1, samples=None, tolerances=None):
    """Run a verification suite; returns the report as a dict."""
    return json.loads(_finsler.run_suite_json(_config(model_spec, suite, seed, samples, tolerances)))


def plot_data(kind, model_spec, seed=1, samples=None):
    """CSV text for laplacian_profile, bg_ratio, indicatrix or geodesic."""
    return _finsler.plot_csv(_config(model_spec, "full", seed, samples, None), kind)
