"""
Hybrid Training Loop
====================

Cross-entropy over softmax(W·p + b). Head gradients are analytic; gradients
of the quantum parameters use the two-term parameter-shift rule applied to
every gate occurrence of a trainable slot:

    dL/dtheta_j = sum_{g uses j} scale_g * sum_k dL/dp_k * (p_k(a_g + pi/2) - p_k(a_g - pi/2)) / 2

All shifted circuits of a batch are executed as one batched simulation (or
one batched cut reconstruction), so the reduction order is fixed.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from models.config import TrainingConfig
from models.errors import CircuitError, DataError
from models.reports import Checkpoint, TrainingLogRow
from models.schemas import Circuit, GateKind, SlotRole
from quantum.circuit import run_batch
from quantum.statevector import probabilities_batch
from hybrid.model import (
    HybridModel,
    angle_table,
    assemble,
    circuit_probabilities,
    forward_batch,
    head_features,
    head_pullback,
    loss,
    softmax,
)
from hybrid.optimizer import OptimizerState, adadelta_step

logger = logging.getLogger(__name__)

SHIFTABLE_KINDS = (GateKind.RY, GateKind.RZ)


# ============================================================================
# PARAMETER SHIFT
# ============================================================================

def trainable_columns(circuit: Circuit) -> List[Tuple[int, int, float]]:
    """(angle-table column, trainable slot index, scale) for every trainable gate occurrence."""
    index = {slot_id: i for i, slot_id in enumerate(circuit.slot_ids(SlotRole.TRAINABLE))}
    columns = []
    for col, gate_index in enumerate(circuit.parametric_gates):
        gate = circuit.gates[gate_index]
        if gate.slot not in index:
            continue
        if gate.kind not in SHIFTABLE_KINDS:
            raise CircuitError(f"gate {gate_index} ({gate.kind.value}) is not shiftable; decompose CRY first")
        columns.append((col, index[gate.slot], gate.scale))
    return columns


def shift_rule_vjp(
    circuit: Circuit,
    angles: np.ndarray,
    cotangents: np.ndarray,
    prob_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """
    Vector-Jacobian product of the output distribution with respect to the
    trainable slots, summed over the batch.

    angles: (B, G) angle table; cotangents: (B, D) with D the width of
    `prob_fn`'s output (the 2^n distribution by default).
    """
    if prob_fn is None:
        def prob_fn(table):
            return probabilities_batch(run_batch(circuit, table))

    angles = np.atleast_2d(angles)
    cotangents = np.atleast_2d(cotangents)
    grad = np.zeros(len(circuit.slot_ids(SlotRole.TRAINABLE)))
    columns = trainable_columns(circuit)
    if not columns:
        return grad

    cols = np.array([c for c, _, _ in columns], dtype=np.intp)
    slots = np.array([s for _, s, _ in columns], dtype=np.intp)
    scales = np.array([w for _, _, w in columns])
    n_cols = len(columns)
    rows, width = angles.shape

    shifted = np.repeat(angles[None, :, :], 2 * n_cols, axis=0)
    shifted[np.arange(n_cols), :, cols] += np.pi / 2
    shifted[n_cols + np.arange(n_cols), :, cols] -= np.pi / 2
    probs = prob_fn(shifted.reshape(2 * n_cols * rows, width)).reshape(2 * n_cols, rows, -1)

    diff = (probs[:n_cols] - probs[n_cols:]) / 2.0
    per_gate = np.einsum("cbd,bd->c", diff, cotangents)
    np.add.at(grad, slots, scales * per_gate)
    return grad


# ============================================================================
# GRADIENTS
# ============================================================================

@dataclass
class Gradients:
    loss: float
    accuracy: float
    theta: np.ndarray
    weights: np.ndarray
    bias: np.ndarray


def _check_batch(model: HybridModel, labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.intp).reshape(-1)
    if labels.size == 0:
        raise DataError("empty batch")
    if labels.min() < 0 or labels.max() >= model.config.n_classes:
        raise DataError(f"labels must lie in [0, {model.config.n_classes})")
    return labels


def gradients(model: HybridModel, features: np.ndarray, labels: np.ndarray) -> Gradients:
    """Loss, accuracy and the gradients of every parameter group on one batch."""
    labels = _check_batch(model, labels)
    angles = angle_table(model, features)
    probs = circuit_probabilities(model, angles)
    inputs = head_features(model, probs)
    predictions = softmax(inputs @ model.weights.T + model.bias)

    rows = labels.shape[0]
    onehot = np.zeros_like(predictions)
    onehot[np.arange(rows), labels] = 1.0
    d_logits = (predictions - onehot) / rows

    d_probs = head_pullback(model, d_logits @ model.weights)
    theta = shift_rule_vjp(model.circuit, angles, d_probs, lambda table: circuit_probabilities(model, table))
    return Gradients(
        loss=loss(predictions, labels),
        accuracy=float(np.mean(predictions.argmax(axis=1) == labels)),
        theta=theta,
        weights=d_logits.T @ inputs,
        bias=d_logits.sum(axis=0),
    )


def quantum_gradient(model: HybridModel, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """dL/dtheta of the mean cross-entropy on one batch."""
    return gradients(model, features, labels).theta


def pack_params(model: HybridModel) -> np.ndarray:
    return np.concatenate([model.theta, model.weights.ravel(), model.bias])


def unpack_params(model: HybridModel, flat: np.ndarray) -> HybridModel:
    n_theta = model.theta.size
    n_weights = model.weights.size
    return model.with_params(
        flat[:n_theta].copy(),
        flat[n_theta:n_theta + n_weights].reshape(model.weights.shape),
        flat[n_theta + n_weights:].copy(),
    )


# ============================================================================
# TRAINING / EVALUATION
# ============================================================================

@dataclass
class Evaluation:
    loss: float
    accuracy: float
    scores: np.ndarray
    predictions: np.ndarray


def evaluate(model: HybridModel, features: np.ndarray, labels: np.ndarray, batch_size: int = 64) -> Evaluation:
    labels = _check_batch(model, labels)
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    chunks = [forward_batch(model, features[i:i + batch_size])[0] for i in range(0, len(labels), batch_size)]
    scores = np.concatenate(chunks)
    predictions = scores.argmax(axis=1)
    return Evaluation(
        loss=loss(scores, labels),
        accuracy=float(np.mean(predictions == labels)),
        scores=scores,
        predictions=predictions,
    )


@dataclass
class TrainResult:
    model: HybridModel
    optimizer: OptimizerState
    log: List[TrainingLogRow] = field(default_factory=list)


def train(
    model: HybridModel,
    features: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    seed: int,
    training: Optional[TrainingConfig] = None,
    optimizer: Optional[OptimizerState] = None,
    validation: Optional[Tuple[str, np.ndarray, np.ndarray]] = None,
    on_epoch: Optional[Callable[[Sequence[TrainingLogRow]], None]] = None,
) -> TrainResult:
    """
    Mini-batch Adadelta. Shuffling depends only on `seed`; after every epoch the
    model is evaluated on the whole training set (and on `validation`, given as
    (split name, features, labels)) to produce the log rows.
    """
    training = training or TrainingConfig(epochs=epochs, seed=seed)
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.intp).reshape(-1)
    if labels.size == 0:
        raise DataError("cannot train on an empty dataset")
    if features.shape[0] != labels.shape[0]:
        raise DataError(f"{features.shape[0]} feature row(s) for {labels.shape[0]} label(s)")

    flat = pack_params(model)
    if optimizer is None:
        optimizer = OptimizerState.zeros(flat.size, rho=training.rho, eps=training.eps, lr=training.lr)
    rng = np.random.default_rng(seed)
    log: List[TrainingLogRow] = []

    for epoch in range(1, epochs + 1):
        order = rng.permutation(labels.size)
        for start in range(0, labels.size, training.batch_size):
            batch = order[start:start + training.batch_size]
            grads = gradients(model, features[batch], labels[batch])
            flat, optimizer = adadelta_step(
                optimizer, flat, np.concatenate([grads.theta, grads.weights.ravel(), grads.bias])
            )
            model = unpack_params(model, flat)

        seen = evaluate(model, features, labels)
        rows = [TrainingLogRow(epoch=epoch, split="train", loss=seen.loss, accuracy=seen.accuracy)]
        if validation is not None:
            name, val_x, val_y = validation
            held = evaluate(model, val_x, val_y)
            rows.append(TrainingLogRow(epoch=epoch, split=name, loss=held.loss, accuracy=held.accuracy))
        log.extend(rows)
        logger.info("epoch %d/%d: loss=%.4f accuracy=%.4f", epoch, epochs, seen.loss, seen.accuracy)
        if on_epoch is not None:
            on_epoch(rows)

    return TrainResult(model=model, optimizer=optimizer, log=log)


# ============================================================================
# CHECKPOINTS
# ============================================================================

def to_checkpoint(model: HybridModel, optimizer: OptimizerState, seed: int, config_hash: str,
                  epochs_trained: int, class_names: Sequence[str] = ()) -> Checkpoint:
    return Checkpoint(
        model=model.config,
        theta=model.theta.tolist(),
        head_weights=model.weights.tolist(),
        head_bias=model.bias.tolist(),
        optimizer=optimizer.snapshot(),
        seed=seed,
        config_hash=config_hash,
        epochs_trained=epochs_trained,
        class_names=list(class_names),
    )


def from_checkpoint(checkpoint: Checkpoint, max_workers: int = 1) -> Tuple[HybridModel, OptimizerState]:
    model = assemble(
        checkpoint.model,
        np.asarray(checkpoint.theta),
        np.asarray(checkpoint.head_weights),
        np.asarray(checkpoint.head_bias),
        max_workers,
    )
    return model, OptimizerState.from_snapshot(checkpoint.optimizer)
