"""Python bindings for the tipo core."""

import json as _json

from . import _tipo
from ._tipo import ConfigError, TipoError, intensity_weight

__all__ = [
    "ConfigError",
    "TipoError",
    "align",
    "default_config",
    "generate",
    "intensity_weight",
    "match_key",
    "run_cli",
    "score_action",
]


def match_key(step):
    return _tipo.match_key(_json.dumps(step))


def align(pair):
    return _json.loads(_tipo.align(_json.dumps(pair)))


def score_action(step, persona):
    return _tipo.score_action(_json.dumps(step), persona)


def default_config(overrides=()):
    return _json.loads(_tipo.default_config(list(overrides)))


def generate(overrides=()):
    return _json.loads(_tipo.generate(list(overrides)))


def run_cli(*args):
    """Run the command-line tool in-process. Returns (exit_code, stdout, stderr)."""
    return _tipo.run_cli([str(a) for a in args])
