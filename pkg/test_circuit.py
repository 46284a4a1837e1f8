"""
Circuit IR: Test Suite
======================

Builders, feature scaling, slot binding, CRY compilation and the circuit
document format.
"""

import sys
import os
import json

# Ensure we can import from root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from models.errors import CircuitError, CircuitFormatError, CutError, DataError
from models.schemas import (
    Circuit,
    CutSpec,
    EncodingSpec,
    FeatureScaling,
    GateKind,
    GateOp,
    KernelGate,
    KernelSpec,
    Slot,
    SlotRole,
)
from quantum.circuit import (
    bind,
    build_encoding_layer,
    build_mps_ansatz,
    build_qcnn_circuit,
    decompose_cry,
    free_slot_ids,
    gate_angle_table,
    run,
    run_batch,
    scale_features,
)
from quantum.cutting import split
from quantum.serialization import (
    deserialize,
    deserialize_fragment,
    deserialize_pair,
    format_decimal,
    serialize,
    serialize_fragment,
    serialize_pair,
)
from quantum.statevector import probabilities, probabilities_batch


class TestEncodingLayer:
    def test_zero_angle_leaves_plus(self):
        circuit = bind(build_encoding_layer(EncodingSpec(n_features=1)), [0.0])
        assert probabilities(run(circuit))[0] == pytest.approx(0.5)

    def test_quarter_turn_reads_one(self):
        circuit = bind(build_encoding_layer(EncodingSpec(n_features=1)), [np.pi / 2])
        assert probabilities(run(circuit))[0] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("angle", [0.1, 0.8, 1.3, 2.9])
    def test_closed_form(self, angle):
        circuit = bind(build_encoding_layer(EncodingSpec(n_features=1)), [angle])
        assert probabilities(run(circuit))[0] == pytest.approx((1 - np.sin(angle)) / 2, abs=1e-12)

    def test_eight_qubits(self):
        circuit = build_encoding_layer(EncodingSpec(n_features=8))
        kinds = [g.kind for g in circuit.gates]
        assert kinds.count(GateKind.H) == 8
        assert kinds.count(GateKind.RY) == 8
        assert len(circuit.slot_ids(SlotRole.ENCODING)) == 8


class TestScaleFeatures:
    def test_three_four(self):
        assert_allclose(scale_features([3, 4], FeatureScaling.L2_NORMALIZE), [0.6, 0.8])

    def test_unit_vector_unchanged(self):
        assert_allclose(scale_features([1, 0, 0], FeatureScaling.L2_NORMALIZE), [1, 0, 0])

    def test_constant_vector(self):
        assert_allclose(scale_features([2, 2, 2, 2], FeatureScaling.L2_NORMALIZE), [0.5, 0.5, 0.5, 0.5])

    def test_none_is_identity(self):
        assert_allclose(scale_features([3, 4], FeatureScaling.NONE), [3, 4])

    def test_default_leaves_angles_alone(self):
        assert_allclose(scale_features([0.3, 1.2, 2.9]), [0.3, 1.2, 2.9])
        assert_allclose(scale_features([0.0, 0.0]), [0.0, 0.0])

    def test_zero_vector(self):
        with pytest.raises(DataError):
            scale_features([0, 0, 0], FeatureScaling.L2_NORMALIZE)


class TestMpsAnsatz:
    def test_single_pair(self):
        circuit = build_mps_ansatz(2)
        assert len(circuit.slot_ids(SlotRole.TRAINABLE)) == 4

    def test_eight_qubits_one_layer(self):
        circuit = build_mps_ansatz(8)
        assert len(circuit.slot_ids(SlotRole.TRAINABLE)) == 28
        assert len(circuit.gates) == 7 * 5

    def test_layers_scale_linearly(self):
        assert len(build_mps_ansatz(8, layers=2).slot_ids(SlotRole.TRAINABLE)) == 56

    def test_ladder_order(self):
        circuit = build_mps_ansatz(4)
        pairs = [g.qubits for g in circuit.gates if g.kind == GateKind.CNOT]
        assert pairs == [(0, 1), (1, 2), (2, 3)]

    def test_custom_kernel(self):
        kernel = KernelSpec(parameter_count=1, template=(
            KernelGate(kind=GateKind.CNOT, wires=(1, 0)),
            KernelGate(kind=GateKind.RZ, wires=(0,), param=0),
        ))
        circuit = build_mps_ansatz(3, kernel)
        assert len(circuit.slot_ids(SlotRole.TRAINABLE)) == 2
        assert circuit.gates[0].qubits == (1, 0)

    def test_kernel_rejects_hadamard(self):
        with pytest.raises(ValidationError):
            KernelSpec(parameter_count=0, template=(KernelGate(kind=GateKind.H, wires=(0,)),))

    def test_one_qubit(self):
        with pytest.raises(CircuitError):
            build_mps_ansatz(1)

    @pytest.mark.parametrize("layers", [1, 2])
    def test_every_pair_repeats_the_first_template(self, layers):
        n, width = 6, len(KernelSpec().template)
        circuit = build_mps_ansatz(n, layers=layers)
        chunks = [circuit.gates[i:i + width] for i in range(0, len(circuit.gates), width)]
        assert len(chunks) == layers * (n - 1)
        first = [(g.kind, g.qubits, g.scale) for g in chunks[0]]
        for index, chunk in enumerate(chunks):
            offset = index % (n - 1)
            assert [(g.kind, tuple(q - offset for q in g.qubits), g.scale) for g in chunk] == first
        slots = [g.slot for g in circuit.gates if g.slot is not None]
        assert len(slots) == len(set(slots))


class TestBinding:
    def test_no_slots(self):
        circuit = Circuit(n_qubits=1, gates=(GateOp(kind=GateKind.H, qubits=(0,)),))
        assert bind(circuit) == circuit

    def test_zeros(self):
        circuit = bind(build_encoding_layer(EncodingSpec(n_features=8)), np.zeros(8))
        assert all(g.angle == 0.0 for g in circuit.gates if g.kind == GateKind.RY)
        assert circuit.is_bound

    def test_count_mismatch(self):
        with pytest.raises(CircuitError):
            bind(build_encoding_layer(EncodingSpec(n_features=8)), np.zeros(7))

    def test_bound_slots_are_no_longer_free(self):
        template = build_qcnn_circuit(EncodingSpec(n_features=2))
        partially = bind(template, [0.1, 0.2], np.zeros(4))
        assert free_slot_ids(partially, SlotRole.ENCODING) == ()
        assert free_slot_ids(template, SlotRole.TRAINABLE) == ("t0", "t1", "t2", "t3")

    def test_unknown_slot_reference(self):
        with pytest.raises(ValidationError):
            Circuit(n_qubits=1, gates=(GateOp(kind=GateKind.RY, qubits=(0,), slot="x9"),))

    def test_run_needs_bound_circuit(self):
        with pytest.raises(CircuitError):
            run(build_encoding_layer(EncodingSpec(n_features=1)))

    def test_rebinding_a_bound_circuit(self):
        template = build_qcnn_circuit(EncodingSpec(n_features=4))
        rng = np.random.default_rng(5)
        bound = bind(template, rng.uniform(0, np.pi, 4), rng.uniform(-np.pi, np.pi, 12))
        assert bind(bound) == bound
        assert bind(bound, [], []) == bound
        with pytest.raises(CircuitError):
            bind(bound, [0.1, 0.2, 0.3, 0.4])


class TestExecution:
    def test_batched_rows_match_single_runs(self):
        template = build_qcnn_circuit(EncodingSpec(n_features=3))
        rng = np.random.default_rng(2)
        x = rng.uniform(0, np.pi, size=(4, 3))
        theta = rng.uniform(-np.pi, np.pi, size=8)
        batch = run_batch(template, gate_angle_table(template, x, theta))
        for row, features in zip(batch, x):
            single = run(bind(template, features, theta))
            assert_allclose(row, single.amplitudes, atol=1e-12)

    def test_cry_decomposition_preserves_output(self):
        template = build_qcnn_circuit(EncodingSpec(n_features=3))
        compiled = decompose_cry(template)
        assert GateKind.CRY not in {g.kind for g in compiled.gates}
        rng = np.random.default_rng(4)
        x, theta = rng.uniform(0, np.pi, 3), rng.uniform(-np.pi, np.pi, 8)
        assert_allclose(probabilities(run(bind(compiled, x, theta))),
                        probabilities(run(bind(template, x, theta))), atol=1e-12)

    def test_global_phase_leaves_probabilities_alone(self):
        template = build_qcnn_circuit(EncodingSpec(n_features=4))
        rng = np.random.default_rng(6)
        angles = gate_angle_table(template, rng.uniform(0, np.pi, size=(5, 4)), rng.uniform(-np.pi, np.pi, 12))
        initial = rng.normal(size=(5, 16)) + 1j * rng.normal(size=(5, 16))
        initial /= np.linalg.norm(initial, axis=1, keepdims=True)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(5, 1)))
        assert_allclose(probabilities_batch(run_batch(template, angles, initial * phases)),
                        probabilities_batch(run_batch(template, angles, initial)), atol=1e-12)

    def test_decomposition_halves_share_the_slot(self):
        circuit = Circuit(n_qubits=2, gates=(GateOp(kind=GateKind.CRY, qubits=(0, 1), slot="t0"),),
                          slots=(Slot(id="t0", role=SlotRole.TRAINABLE),))
        halves = [g for g in decompose_cry(circuit).gates if g.kind == GateKind.RY]
        assert [(g.slot, g.scale) for g in halves] == [("t0", 0.5), ("t0", -0.5)]


def random_circuit(rng) -> Circuit:
    n = int(rng.integers(1, 6))
    roles = (SlotRole.ENCODING, SlotRole.TRAINABLE)
    slots = tuple(Slot(id=f"s{i}", role=roles[i % 2]) for i in range(int(rng.integers(0, 4))))
    kinds = [GateKind.H, GateKind.RY, GateKind.RZ] + ([GateKind.CRY, GateKind.CNOT] if n > 1 else [])
    gates = []
    for _ in range(int(rng.integers(0, 25))):
        kind = kinds[int(rng.integers(len(kinds)))]
        arity = 2 if kind in (GateKind.CRY, GateKind.CNOT) else 1
        qubits = tuple(int(q) for q in rng.choice(n, size=arity, replace=False))
        params = {}
        if kind in (GateKind.RY, GateKind.RZ, GateKind.CRY):
            params["angle"] = float(rng.normal(scale=np.pi))
            if slots and rng.random() < 0.5:
                params["slot"] = slots[int(rng.integers(len(slots)))].id
                params["scale"] = float(rng.choice([1.0, 0.5, -0.5, rng.normal()]))
                if rng.random() < 0.5:
                    del params["angle"]
        gates.append(GateOp(kind=kind, qubits=qubits, **params))
    return Circuit(n_qubits=n, gates=tuple(gates), slots=slots)


class TestSerialization:
    def test_angles_survive_exactly(self):
        template = build_qcnn_circuit(EncodingSpec(n_features=3))
        rng = np.random.default_rng(8)
        circuit = bind(template, rng.uniform(0, np.pi, 3), rng.uniform(-np.pi, np.pi, 8))
        restored = deserialize(serialize(circuit))
        assert restored == circuit

    def test_random_circuits(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            circuit = random_circuit(rng)
            assert deserialize(serialize(circuit)) == circuit

    def test_empty_circuit(self):
        assert deserialize(serialize(Circuit(n_qubits=1))) == Circuit(n_qubits=1)

    def test_unbound_compiled_ansatz(self):
        circuit = decompose_cry(build_qcnn_circuit(EncodingSpec(n_features=8)))
        restored = deserialize(serialize(circuit))
        assert restored == circuit
        trainable = set(restored.slot_ids(SlotRole.TRAINABLE))
        assert len(trainable) == 28
        assert {g.scale for g in restored.gates if g.slot in trainable} == {1.0, 0.5, -0.5}

    def test_decimal_strings(self):
        assert format_decimal(0.1) == "0.10000000000000001"
        assert float(format_decimal(np.pi)) == np.pi

    def test_unknown_gate_kind(self):
        doc = {"version": 1, "n_qubits": 1, "gates": [{"kind": "RX", "qubits": [0], "angle": "0.5"}], "slots": []}
        with pytest.raises(CircuitFormatError):
            deserialize(json.dumps(doc))

    def test_dangling_slot(self):
        doc = {"version": 1, "n_qubits": 1, "gates": [{"kind": "RY", "qubits": [0], "slot": "t0"}], "slots": []}
        with pytest.raises(CircuitFormatError):
            deserialize(json.dumps(doc))

    def test_qubit_out_of_range(self):
        doc = {"version": 1, "n_qubits": 1, "gates": [{"kind": "H", "qubits": [3]}], "slots": []}
        with pytest.raises(CircuitFormatError):
            deserialize(json.dumps(doc))

    def test_not_json(self):
        with pytest.raises(CircuitFormatError):
            deserialize("{not json")

    def test_fragment_documents(self):
        circuit = Circuit(n_qubits=2, gates=(
            GateOp(kind=GateKind.H, qubits=(0,)),
            GateOp(kind=GateKind.CNOT, qubits=(0, 1)),
        ))
        pair = split(circuit, CutSpec(wire=0, position=1))
        upstream = deserialize_fragment(serialize_fragment(pair.upstream))
        assert upstream == pair.upstream
        assert json.loads(serialize_fragment(pair.downstream))["fragment"]["qubit_map"] == [0, 1]
        assert deserialize_pair(serialize_pair(pair)) == pair

    def test_pair_from_different_cuts(self):
        circuit = Circuit(n_qubits=2, gates=(
            GateOp(kind=GateKind.H, qubits=(0,)),
            GateOp(kind=GateKind.CNOT, qubits=(0, 1)),
        ))
        early, late = split(circuit, CutSpec(wire=0, position=0)), split(circuit, CutSpec(wire=0, position=1))
        document = json.dumps([json.loads(serialize_fragment(late.upstream)),
                               json.loads(serialize_fragment(early.downstream))])
        with pytest.raises(CutError):
            deserialize_pair(document)

    def test_plain_circuit_is_not_a_fragment(self):
        with pytest.raises(CircuitFormatError):
            deserialize_fragment(serialize(Circuit(n_qubits=1)))
