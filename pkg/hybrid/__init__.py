"""Hybrid package: QCNN model, Adadelta and the parameter-shift training loop."""

from .model import HybridModel, forward, forward_batch, init_model, loss, toggle_cut
from .optimizer import OptimizerState, adadelta_step
from .trainer import evaluate, quantum_gradient, shift_rule_vjp, train

__all__ = [
    "HybridModel",
    "forward",
    "forward_batch",
    "init_model",
    "loss",
    "toggle_cut",
    "OptimizerState",
    "adadelta_step",
    "evaluate",
    "quantum_gradient",
    "shift_rule_vjp",
    "train",
]
