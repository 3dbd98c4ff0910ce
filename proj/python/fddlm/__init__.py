"""Fictitious domain solver for elliptic interface problems."""

import json

from . import _core
from ._core import ConfigError, clip_convex, signed_area

__all__ = ["ConfigError", "clip_convex", "convergence", "infsup", "meshes",
           "resolve_config", "signed_area", "solve"]


def _text(config):
    return json.dumps(config or {})


def resolve_config(config=None):
    return json.loads(_core.resolve_config(_text(config)))


def solve(config=None, level=None):
    out = _core.solve(_text(config), -1 if level is None else level)
    out["config"] = json.loads(out["config"])
    return out


def convergence(config=None):
    return json.loads(_core.convergence(_text(config)))


def infsup(config=None):
    return json.loads(_core.infsup(_text(config)))


def meshes(config=None, level=None):
    return _core.meshes(_text(config), -1 if level is None else level)
