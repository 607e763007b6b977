"""Conditional random walk approximation, sampling and rare-event estimation."""

import json

from ._longrun import (
    ConfigError,
    DomainError,
    Error,
    RangeError,
    eval_log_g,
    is_estimate,
    log_tail_prob,
    log_tilt_ratio,
    oracle,
    rao_blackwell_gamma,
    sample_path,
    saddlepoint_mean_logpdf,
    select_k,
)
from ._longrun import Model as _Model


def model(name, custom=None, **parameters):
    """Builds a model the way the run configuration's model block does."""
    block = {"name": name}
    if parameters:
        block["parameters"] = parameters
    if custom is not None:
        block["custom"] = custom
    return _Model.from_json(json.dumps(block))


__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "RangeError",
    "eval_log_g",
    "is_estimate",
    "log_tail_prob",
    "log_tilt_ratio",
    "model",
    "oracle",
    "rao_blackwell_gamma",
    "sample_path",
    "saddlepoint_mean_logpdf",
    "select_k",
]
