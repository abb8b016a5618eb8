"""Quantum discriminator: a block-diagonal X/I unitary classifier over binary features."""

from .discriminator import (
    DiscriminatorModel,
    QuantumDiscriminator,
    build_unitary,
    feature_index,
    l1_error,
    predict,
    predict_many,
    recommended_feature_width,
    train,
)
from .datasets import IrisBinarizer
from .synth import synthesize, verify_model_circuit

__all__ = [
    "DiscriminatorModel",
    "IrisBinarizer",
    "QuantumDiscriminator",
    "build_unitary",
    "feature_index",
    "l1_error",
    "predict",
    "predict_many",
    "recommended_feature_width",
    "synthesize",
    "train",
    "verify_model_circuit",
]

__version__ = "0.1.0"
