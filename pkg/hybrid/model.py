"""
Hybrid QCNN Model
=================

Quantum layer (angle encoding + MPS ladder, optionally executed as two cut
fragments) producing a 2^n probability vector, followed by a fully connected
softmax head.

CRY gates are compiled into RY/CNOT halves when the model is built so every
trainable gate obeys the two-term shift rule.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from models.config import HeadInput, ModelConfig
from models.errors import DataError, DimensionError
from models.schemas import Circuit, CutSpec, EncodingSpec, FeatureScaling, GateKind, SlotRole
from quantum.circuit import build_qcnn_circuit, decompose_cry, gate_angle_table, run_batch, scale_features
from quantum.cutting import (
    ReconstructionPlan,
    default_cut,
    normalize_distribution,
    plan_for,
    reconstruct_probabilities_batch,
    split_columns,
)
from quantum.statevector import marginal_ones, probabilities_batch

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-12


@dataclass
class HybridModel:
    """Quantum ansatz parameters theta plus the classical head (W, b)."""
    config: ModelConfig
    circuit: Circuit
    theta: np.ndarray
    weights: np.ndarray
    bias: np.ndarray
    plan: Optional[ReconstructionPlan] = None
    up_columns: Optional[np.ndarray] = None
    down_columns: Optional[np.ndarray] = None
    max_workers: int = 1
    bit_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.theta.shape != (len(self.circuit.slot_ids(SlotRole.TRAINABLE)),):
            raise DimensionError(f"theta has shape {self.theta.shape}, ansatz has "
                                 f"{len(self.circuit.slot_ids(SlotRole.TRAINABLE))} trainable slots")
        if self.weights.shape != (self.config.n_classes, self.head_dim):
            raise DimensionError(f"head weights {self.weights.shape} do not match "
                                 f"({self.config.n_classes}, {self.head_dim})")
        if self.bias.shape != (self.config.n_classes,):
            raise DimensionError(f"head bias {self.bias.shape} does not match ({self.config.n_classes},)")
        n = self.n_qubits
        indices = np.arange(2 ** n)
        # bit_table[i, k] = value of qubit i in basis state k (qubit 0 = MSB)
        self.bit_table = ((indices[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1).astype(np.float64)

    @property
    def n_qubits(self) -> int:
        return self.config.n_qubits

    @property
    def head_dim(self) -> int:
        return 2 ** self.n_qubits if self.config.head_input == HeadInput.FULL else self.n_qubits

    @property
    def cut_enabled(self) -> bool:
        return self.plan is not None

    @property
    def n_parameters(self) -> int:
        """Trainable scalars: kernel angles, head weights and bias."""
        return int(self.theta.size + self.weights.size + self.bias.size)

    def with_params(self, theta: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> "HybridModel":
        return replace(self, theta=theta, weights=weights, bias=bias)


# ============================================================================
# CONSTRUCTION
# ============================================================================

def _compiled_position(circuit: Circuit, position: int) -> int:
    """Gate index in the CRY-decomposed circuit matching `position` in `circuit`."""
    return sum(4 if gate.kind == GateKind.CRY else 1 for gate in circuit.gates[:position])


def build_circuit(config: ModelConfig) -> Tuple[Circuit, Optional[CutSpec]]:
    """
    Compiled model circuit and, when cutting is on, the cut on it.
    A configured cut position refers to the circuit before CRY decomposition.
    """
    built = build_qcnn_circuit(EncodingSpec(n_features=config.n_qubits, scaling=config.scaling),
                               config.kernel, config.layers)
    compiled = decompose_cry(built)
    if not config.cut_enabled:
        return compiled, None
    if config.cut_wire is not None:
        return compiled, CutSpec(wire=config.cut_wire, position=_compiled_position(built, config.cut_position))
    return compiled, default_cut(compiled)


def assemble(config: ModelConfig, theta: np.ndarray, weights: np.ndarray, bias: np.ndarray,
             max_workers: int = 1) -> HybridModel:
    circuit, cut = build_circuit(config)
    plan = up = down = None
    if cut is not None:
        plan = plan_for(circuit, cut)
        up, down = split_columns(circuit, cut)
        logger.debug("cut model at wire %d: %d+%d qubits", cut.wire,
                     plan.pair.upstream.circuit.n_qubits, plan.pair.downstream.circuit.n_qubits)
    return HybridModel(
        config=config,
        circuit=circuit,
        theta=np.asarray(theta, dtype=np.float64),
        weights=np.asarray(weights, dtype=np.float64),
        bias=np.asarray(bias, dtype=np.float64),
        plan=plan,
        up_columns=up,
        down_columns=down,
        max_workers=max_workers,
    )


def init_model(config: ModelConfig, seed: int, max_workers: int = 1) -> HybridModel:
    """theta ~ U[-pi, pi); W, b ~ U[-k, k] with k = 1/sqrt(head input width)."""
    rng = np.random.default_rng(seed)
    circuit, _ = build_circuit(config)
    n_theta = len(circuit.slot_ids(SlotRole.TRAINABLE))
    head_dim = 2 ** config.n_qubits if config.head_input == HeadInput.FULL else config.n_qubits
    k = 1.0 / np.sqrt(head_dim)
    theta = rng.uniform(-np.pi, np.pi, size=n_theta)
    weights = rng.uniform(-k, k, size=(config.n_classes, head_dim))
    bias = rng.uniform(-k, k, size=config.n_classes)
    return assemble(config, theta, weights, bias, max_workers)


def toggle_cut(model: HybridModel, cut_enabled: bool) -> HybridModel:
    """Same parameters, executed with or without the wire cut."""
    config = model.config.model_copy(update={"cut_enabled": cut_enabled})
    return assemble(config, model.theta, model.weights, model.bias, model.max_workers)


# ============================================================================
# FORWARD PASS
# ============================================================================

def encoding_angles(model: HybridModel, features: np.ndarray) -> np.ndarray:
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[1] != model.n_qubits:
        raise DimensionError(f"expected {model.n_qubits} feature(s) per sample, got {features.shape[1]}")
    if model.config.scaling == FeatureScaling.NONE:
        return features
    return np.stack([scale_features(row, model.config.scaling) for row in features])


def angle_table(model: HybridModel, features: np.ndarray, theta: Optional[np.ndarray] = None) -> np.ndarray:
    theta = model.theta if theta is None else theta
    return gate_angle_table(model.circuit, encoding_angles(model, features), theta)


def circuit_probabilities(model: HybridModel, angles: np.ndarray) -> np.ndarray:
    """(B, 2^n) output distributions for rows of the compiled circuit's angle table."""
    if model.plan is None:
        return probabilities_batch(run_batch(model.circuit, angles))
    raw = reconstruct_probabilities_batch(
        model.plan, angles[:, model.up_columns], angles[:, model.down_columns], model.max_workers,
    )
    return normalize_distribution(raw)


def head_features(model: HybridModel, probs: np.ndarray) -> np.ndarray:
    if model.config.head_input == HeadInput.FULL:
        return probs
    return marginal_ones(probs, model.n_qubits)


def head_pullback(model: HybridModel, grad_features: np.ndarray) -> np.ndarray:
    """Map dL/d(head input) back to dL/d(2^n probabilities)."""
    if model.config.head_input == HeadInput.FULL:
        return grad_features
    return grad_features @ model.bit_table


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def forward_batch(model: HybridModel, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Class probabilities (B, classes) and the head inputs (B, head_dim)."""
    probs = circuit_probabilities(model, angle_table(model, features))
    inputs = head_features(model, probs)
    return softmax(inputs @ model.weights.T + model.bias), inputs


def forward(model: HybridModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise DimensionError("forward takes a single feature vector; use forward_batch for batches")
    return forward_batch(model, features)[0][0]


def loss(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Mean cross-entropy, probabilities floored at 1e-12."""
    predictions = np.atleast_2d(predictions)
    labels = np.asarray(labels, dtype=np.intp).reshape(-1)
    if labels.shape[0] != predictions.shape[0]:
        raise DimensionError(f"{predictions.shape[0]} prediction(s) for {labels.shape[0]} label(s)")
    if labels.size and (labels.min() < 0 or labels.max() >= predictions.shape[1]):
        raise DataError(f"labels must lie in [0, {predictions.shape[1]})")
    picked = predictions[np.arange(labels.shape[0]), labels]
    return float(np.mean(-np.log(np.maximum(picked, PROBABILITY_FLOOR))))
