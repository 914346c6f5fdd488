"""Minimal neural network engine: embedding, conv, pooling, dense layers
with seeded initialization, SGD-momentum training, and a finite-difference
gradient checker. Hot kernels run through a compiled extension when
available (see moodtunes.nn.kernels)."""

from .gradcheck import grad_check
from .layers import (
    Conv1dSpec,
    Conv2dSpec,
    DenseSpec,
    EmbeddingSpec,
    GlobalMaxPoolSpec,
    MaxPool2dSpec,
    ReluSpec,
    ShapeMismatch,
    SoftmaxSpec,
)
from .model import (
    IndexOutOfRange,
    Model,
    backward,
    build_model,
    forward,
    load_checkpoint,
    loss_cross_entropy,
    save_checkpoint,
)
from .train import EmptyDataset, TrainConfig, init_velocity, predict_classes, sgd_step, train
from . import kernels

__all__ = [
    "Conv1dSpec",
    "Conv2dSpec",
    "DenseSpec",
    "EmbeddingSpec",
    "EmptyDataset",
    "GlobalMaxPoolSpec",
    "IndexOutOfRange",
    "MaxPool2dSpec",
    "Model",
    "ReluSpec",
    "ShapeMismatch",
    "SoftmaxSpec",
    "TrainConfig",
    "backward",
    "build_model",
    "forward",
    "grad_check",
    "init_velocity",
    "kernels",
    "load_checkpoint",
    "loss_cross_entropy",
    "predict_classes",
    "save_checkpoint",
    "sgd_step",
    "train",
]
