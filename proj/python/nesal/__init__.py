"""Exact verifier for neuro-symbolic properties of ReLU networks.

Thin wrapper over the C++ core: rationals come back as fractions.Fraction,
reports as dicts.
"""

import json
from fractions import Fraction
from pathlib import Path

from . import _nesal
from ._nesal import NetworkError, PropertyError, SmtError, TemplateError, run_cli

__version__ = _nesal.__version__

__all__ = [
    "NetworkError",
    "PropertyError",
    "SmtError",
    "TemplateError",
    "check_cex",
    "evaluate",
    "export_smt2",
    "network_info",
    "render_template",
    "run_cli",
    "verify",
]


def _text(network):
    """Accepts JSON text, a path, or a dict."""
    if isinstance(network, dict):
        return json.dumps(network)
    if isinstance(network, Path) or (isinstance(network, str) and not network.lstrip().startswith("{")):
        return Path(network).read_text()
    return network


def _str(x):
    if isinstance(x, float):
        x = Fraction(x)  # exact binary value
    return str(x)


def evaluate(network, x):
    return [Fraction(v) for v in _nesal.evaluate(_text(network), [_str(v) for v in x])]


def network_info(network):
    return _nesal.network_info(_text(network))


def verify(spec_path, networks=None, timeout=1800.0, threads=1, seed=0, max_splits=0):
    report = _nesal.verify(str(spec_path), {k: str(v) for k, v in (networks or {}).items()},
                           timeout, threads, seed, max_splits)
    return json.loads(report)


def export_smt2(spec_path, networks=None):
    return _nesal.export_smt2(str(spec_path), {k: str(v) for k, v in (networks or {}).items()})


def check_cex(spec_path, report, networks=None):
    if isinstance(report, dict):
        report = json.dumps(report)
    return _nesal.check_cex(str(spec_path), report, {k: str(v) for k, v in (networks or {}).items()})


def render_template(kind, nuv, input_dim, output_dim, spec="", cls=None, epsilon=None, delta=None,
                    point=(), sensitive=None, box=(0, 1)):
    return _nesal.render_template(
        kind, str(nuv), str(spec), input_dim, output_dim, cls,
        None if epsilon is None else _str(epsilon),
        None if delta is None else _str(delta),
        [_str(p) for p in point], sensitive,
        None if box is None else (_str(box[0]), _str(box[1])))
