"""Gaussian-process gradients, curvatures and curvilinear wombling."""

import json

from ._core import (
    Chains,
    CurvwombError,
    cross_cov_blocks,
    differentials_csv,
    fit_csv,
    hpd,
    load_chains,
    parse_chains,
    pattern_mean,
    simulate,
)
from . import _core

__all__ = [
    "Chains",
    "CurvwombError",
    "cross_cov_blocks",
    "differentials",
    "differentials_csv",
    "fit",
    "fit_csv",
    "hpd",
    "load_chains",
    "parse_chains",
    "pattern_mean",
    "simulate",
    "womble",
]


def _config(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else json.dumps(config)


def fit(locations, y, X=None, config=None):
    """Run the sampler. `config` is a run-configuration dict or JSON string."""
    return _core.fit(locations, y, X, _config(config))


def differentials(chains, config=None):
    """Posterior summaries of the latent surface and its derivatives on a grid."""
    return _core.differentials(chains, _config(config))


def womble(chains, curve, config=None):
    """Wombling measures along `curve` (a curve-document dict or JSON string)."""
    text = _core.womble_json(chains, _config(curve), _config(config))
    return json.loads(text)
