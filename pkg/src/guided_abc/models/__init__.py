"""Benchmark generative models and the model registry."""

from .base import Model, mad_calibrate
from .boom_bust import BoomBustModel, boom_bust_simulate, boom_bust_summaries
from .cell import CellModel, cell_simulate
from .gk import HierarchicalGkModel, gk_quantile, gk_sample, gk_summaries
from .two_moons import TwoMoonsModel, two_moons_simulate
from .twisted import TwistedModel

MODEL_REGISTRY = {
    "two_moons": TwoMoonsModel,
    "twisted": TwistedModel,
    "gk_hierarchical": HierarchicalGkModel,
    "boom_bust": BoomBustModel,
    "cell": CellModel,
}


def get_model(name, **overrides):
    """Instantiate a registered model, passing overrides to its constructor."""
    if name not in MODEL_REGISTRY:
        raise ValueError(
            f"unknown model {name!r}; expected one of {sorted(MODEL_REGISTRY)}"
        )
    return MODEL_REGISTRY[name](**overrides)


__all__ = [
    "Model",
    "mad_calibrate",
    "get_model",
    "MODEL_REGISTRY",
    "TwoMoonsModel",
    "TwistedModel",
    "HierarchicalGkModel",
    "BoomBustModel",
    "CellModel",
    "two_moons_simulate",
    "boom_bust_simulate",
    "boom_bust_summaries",
    "cell_simulate",
    "gk_quantile",
    "gk_sample",
    "gk_summaries",
]
