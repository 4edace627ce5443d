"""Toy-scale physics-prior network for shape from polarization.

Consumes the primary toolkit's outputs (PFM/PNG/manifest/plan files via its
CLI) and trains an encoder-decoder with spatially-adaptive normalization to
regress unit surface normals under a cosine loss.
"""

from .data import generate_dataset, load_sample, make_sample
from .loss import cosine_loss
from .model import (
    ModelConfig,
    NormalEstimator,
    SpadeNorm,
    build_model,
    paper_scale_config,
    standardize,
)
from .predict import predict_full
from .train import train

__version__ = "0.1.0"

__all__ = [
    "ModelConfig",
    "NormalEstimator",
    "SpadeNorm",
    "build_model",
    "cosine_loss",
    "generate_dataset",
    "load_sample",
    "make_sample",
    "paper_scale_config",
    "predict_full",
    "standardize",
    "train",
]
