"""
Circuit IR: builders for the angle-encoding layer and the MPS-ladder ansatz,
slot binding, and execution (single or batched) on the statevector core.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import CircuitError, DataError, DimensionError
from models.schemas import (
    Circuit,
    EncodingSpec,
    FeatureScaling,
    GateKind,
    GateOp,
    KernelSpec,
    Slot,
    SlotRole,
)
from quantum.statevector import StateVector, apply_matrices, gate_matrices

logger = logging.getLogger(__name__)


# ============================================================================
# BUILDERS
# ============================================================================

def encoding_slot(qubit: int) -> str:
    return f"x{qubit}"


def trainable_slot(index: int) -> str:
    return f"t{index}"


def build_encoding_layer(spec: EncodingSpec) -> Circuit:
    """H then RY(x_i) on every qubit i; the RY angles are encoding slots."""
    if spec.n_features < 1:
        raise CircuitError("the encoding layer needs at least one feature")
    gates: List[GateOp] = []
    for qubit in range(spec.n_features):
        gates.append(GateOp(kind=GateKind.H, qubits=(qubit,)))
        gates.append(GateOp(kind=GateKind.RY, qubits=(qubit,), slot=encoding_slot(qubit)))
    slots = tuple(Slot(id=encoding_slot(q), role=SlotRole.ENCODING) for q in range(spec.n_features))
    return Circuit(n_qubits=spec.n_features, gates=tuple(gates), slots=slots)


def scale_features(x: Sequence[float], scaling: FeatureScaling = FeatureScaling.NONE) -> np.ndarray:
    """Divide by C = sqrt(sum x_i^2) under l2-normalize; identity under none."""
    values = np.asarray(x, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DimensionError("feature vector must be a non-empty 1-D sequence")
    if scaling == FeatureScaling.NONE:
        return values.copy()
    norm = float(np.sqrt(np.sum(values ** 2)))
    if norm == 0.0:
        raise DataError("cannot l2-normalize an all-zero feature vector")
    return values / norm


def build_mps_ansatz(n_qubits: int, kernel: Optional[KernelSpec] = None, layers: int = 1) -> Circuit:
    """
    Ladder of kernels on (q0,q1), (q1,q2), ..., (q_{n-2},q_{n-1}), repeated
    `layers` times. Every kernel instance gets fresh trainable slots, numbered
    layer-major then pair then kernel parameter.
    """
    kernel = kernel or KernelSpec()
    if n_qubits < 2:
        raise CircuitError("the MPS ansatz needs at least two qubits")
    if layers < 1:
        raise CircuitError("the MPS ansatz needs at least one layer")

    gates: List[GateOp] = []
    slots: List[Slot] = []
    for _layer in range(layers):
        for pair in range(n_qubits - 1):
            base = len(slots)
            slots.extend(
                Slot(id=trainable_slot(base + p), role=SlotRole.TRAINABLE)
                for p in range(kernel.parameter_count)
            )
            for template in kernel.template:
                qubits = tuple(pair + w for w in template.wires)
                slot = trainable_slot(base + template.param) if template.param is not None else None
                gates.append(GateOp(kind=template.kind, qubits=qubits, slot=slot))
    return Circuit(n_qubits=n_qubits, gates=tuple(gates), slots=tuple(slots))


def compose(first: Circuit, second: Circuit) -> Circuit:
    """Run `first` then `second` on the same wires; slot tables are merged."""
    if first.n_qubits != second.n_qubits:
        raise CircuitError(f"cannot compose {first.n_qubits}- and {second.n_qubits}-qubit circuits")
    roles = {slot.id: slot.role for slot in first.slots}
    merged = list(first.slots)
    for slot in second.slots:
        if slot.id in roles:
            if roles[slot.id] != slot.role:
                raise CircuitError(f"slot '{slot.id}' has conflicting roles")
            continue
        merged.append(slot)
    return Circuit(n_qubits=first.n_qubits, gates=first.gates + second.gates, slots=tuple(merged))


def build_qcnn_circuit(encoding: EncodingSpec, kernel: Optional[KernelSpec] = None, layers: int = 1) -> Circuit:
    """Encoding layer followed by the MPS ansatz."""
    return compose(build_encoding_layer(encoding), build_mps_ansatz(encoding.n_features, kernel, layers))


def decompose_cry(circuit: Circuit) -> Circuit:
    """Rewrite CRY(θ) as RY(θ/2), CNOT, RY(-θ/2), CNOT on the same pair."""
    gates: List[GateOp] = []
    for gate in circuit.gates:
        if gate.kind != GateKind.CRY:
            gates.append(gate)
            continue
        control, target = gate.qubits
        half = None if gate.angle is None else gate.angle / 2.0
        gates.extend([
            GateOp(kind=GateKind.RY, qubits=(target,), slot=gate.slot, scale=gate.scale / 2.0, angle=half),
            GateOp(kind=GateKind.CNOT, qubits=(control, target)),
            GateOp(kind=GateKind.RY, qubits=(target,), slot=gate.slot, scale=-gate.scale / 2.0,
                   angle=None if half is None else -half),
            GateOp(kind=GateKind.CNOT, qubits=(control, target)),
        ])
    return circuit.model_copy(update={"gates": tuple(gates)})


# ============================================================================
# BINDING
# ============================================================================

def free_slot_ids(circuit: Circuit, role: SlotRole) -> Tuple[str, ...]:
    """Slots of `role` still waiting for a value, in table order."""
    bound = {g.slot for g in circuit.gates if g.slot is not None and g.angle is not None}
    unbound = {g.slot for g in circuit.gates if g.slot is not None and g.angle is None}
    return tuple(s for s in circuit.slot_ids(role) if s in unbound or s not in bound)


def _slot_values(circuit: Circuit, encoding_values, trainable_values) -> Dict[str, float]:
    values: Dict[str, float] = {}
    for role, given in ((SlotRole.ENCODING, encoding_values), (SlotRole.TRAINABLE, trainable_values)):
        ids = free_slot_ids(circuit, role)
        given = np.asarray(given, dtype=np.float64).reshape(-1)
        if given.size != len(ids):
            raise CircuitError(f"{role.value} slots: expected {len(ids)} value(s), got {given.size}")
        values.update(zip(ids, given.tolist()))
    return values


def bind(circuit: Circuit, encoding_values: Sequence[float] = (), trainable_values: Sequence[float] = ()) -> Circuit:
    """Replace every free slot by its literal angle; the slot table is kept."""
    values = _slot_values(circuit, encoding_values, trainable_values)
    gates = tuple(
        gate.model_copy(update={"angle": gate.scale * values[gate.slot]})
        if gate.slot is not None and gate.angle is None else gate
        for gate in circuit.gates
    )
    return circuit.model_copy(update={"gates": gates})


def gate_angle_table(
    circuit: Circuit,
    encoding_values: Optional[np.ndarray] = None,
    trainable_values: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    (B, G) table of effective angles for the G parametric gates.
    Value arrays may be 1-D (shared by every row) or 2-D (one row each).
    """
    columns = {}
    rows = 1
    for role, given in ((SlotRole.ENCODING, encoding_values), (SlotRole.TRAINABLE, trainable_values)):
        ids = free_slot_ids(circuit, role)
        table = np.zeros((1, 0)) if given is None else np.atleast_2d(np.asarray(given, dtype=np.float64))
        if table.shape[1] != len(ids):
            raise CircuitError(f"{role.value} slots: expected {len(ids)} value(s), got {table.shape[1]}")
        if table.shape[0] != 1:
            if rows not in (1, table.shape[0]):
                raise DimensionError("encoding and trainable tables disagree on row count")
            rows = table.shape[0]
        for col, slot_id in enumerate(ids):
            columns[slot_id] = table[:, col]

    parametric = circuit.parametric_gates
    out = np.empty((rows, len(parametric)))
    for col, index in enumerate(parametric):
        gate = circuit.gates[index]
        if gate.angle is not None:
            out[:, col] = gate.angle
        else:
            out[:, col] = gate.scale * columns[gate.slot]
    return out


# ============================================================================
# EXECUTION
# ============================================================================

def zero_batch(n_qubits: int, rows: int) -> np.ndarray:
    batch = np.zeros((rows, 2 ** n_qubits), dtype=np.complex128)
    batch[:, 0] = 1.0
    return batch


def run_batch(circuit: Circuit, angles: np.ndarray, initial: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Execute one circuit structure over many angle rows.
    `angles` is (B, G) as produced by gate_angle_table; `initial` is (B, 2^n)
    or None for |0...0>. Returns the (B, 2^n) final amplitudes.
    """
    angles = np.atleast_2d(angles)
    if angles.shape[1] != len(circuit.parametric_gates):
        raise DimensionError(f"expected {len(circuit.parametric_gates)} angle column(s), got {angles.shape[1]}")
    rows = angles.shape[0]
    if initial is None:
        batch = zero_batch(circuit.n_qubits, rows)
    else:
        batch = np.asarray(initial, dtype=np.complex128)
        if batch.shape[1] != 2 ** circuit.n_qubits:
            raise DimensionError(f"initial states have {batch.shape[1]} amplitudes, circuit needs {2 ** circuit.n_qubits}")
        if batch.shape[0] != rows:
            batch = np.broadcast_to(batch, (rows, batch.shape[1]))

    col = 0
    for gate in circuit.gates:
        if gate.is_parametric:
            matrices = gate_matrices(gate.kind, angles[:, col])
            col += 1
        else:
            matrices = gate_matrices(gate.kind)
        batch = apply_matrices(batch, matrices, gate.qubits, circuit.n_qubits)
    return batch


def run(circuit: Circuit, initial: Optional[StateVector] = None) -> StateVector:
    """Simulate a fully bound circuit from |0...0> (or `initial`)."""
    if not circuit.is_bound:
        raise CircuitError("circuit has unbound slots; call bind() first")
    if initial is not None and initial.n_qubits != circuit.n_qubits:
        raise DimensionError(f"initial state has {initial.n_qubits} qubit(s), circuit has {circuit.n_qubits}")
    angles = gate_angle_table(circuit, *default_slot_values(circuit))
    start = None if initial is None else initial.amplitudes[None, :]
    return StateVector(run_batch(circuit, angles, start)[0])


def default_slot_values(circuit: Circuit):
    # a bound circuit may still list unreferenced slots; they take zeros
    enc = np.zeros(len(free_slot_ids(circuit, SlotRole.ENCODING)))
    tr = np.zeros(len(free_slot_ids(circuit, SlotRole.TRAINABLE)))
    return enc, tr
