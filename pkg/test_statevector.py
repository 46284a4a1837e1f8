"""
Statevector Core: Test Suite
============================

Gate application, expectations, probabilities and eigenstate preparation,
checked against hand-computed amplitudes and dense matrix products.
"""

import sys
import os

# Ensure we can import from root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from models.errors import CircuitError, DimensionError
from models.schemas import PARAMETRIC_KINDS, EigenstateLabel, GateKind, GateOp, PauliObservable
from quantum.statevector import (
    CNOT,
    HADAMARD,
    StateVector,
    apply_gate,
    apply_matrices,
    cry_matrices,
    expectation,
    kron,
    marginal_ones,
    parse_eigenstate,
    pauli_decompose,
    pauli_matrix,
    prepare_eigenstate,
    probabilities,
    ry_matrices,
    rz_matrices,
)

SQRT_HALF = 1 / np.sqrt(2)


def bell_state() -> StateVector:
    state = apply_gate(StateVector.zero(2), GateOp(kind=GateKind.H, qubits=(0,)))
    return apply_gate(state, GateOp(kind=GateKind.CNOT, qubits=(0, 1)))


class TestApplyGate:
    def test_hadamard_on_zero(self):
        state = apply_gate(StateVector.zero(1), GateOp(kind=GateKind.H, qubits=(0,)))
        assert_allclose(state.amplitudes, [SQRT_HALF, SQRT_HALF], atol=1e-12)

    def test_ry_pi_flips_zero_to_one(self):
        state = apply_gate(StateVector.zero(1), GateOp(kind=GateKind.RY, qubits=(0,), angle=np.pi))
        assert_allclose(state.amplitudes, [0, 1], atol=1e-12)

    def test_cnot_with_control_set(self):
        state = StateVector(np.array([0, 0, 1, 0]))  # |10>
        out = apply_gate(state, GateOp(kind=GateKind.CNOT, qubits=(0, 1)))
        assert_allclose(out.amplitudes, [0, 0, 0, 1], atol=1e-12)

    def test_cnot_control_on_lower_significance(self):
        state = StateVector(np.array([0, 1, 0, 0]))  # |01>, control q1
        out = apply_gate(state, GateOp(kind=GateKind.CNOT, qubits=(1, 0)))
        assert_allclose(out.amplitudes, [0, 0, 0, 1], atol=1e-12)

    def test_preserves_norm(self):
        rng = np.random.default_rng(3)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        state = StateVector(amps / np.linalg.norm(amps))
        for gate in (
            GateOp(kind=GateKind.RY, qubits=(1,), angle=0.7),
            GateOp(kind=GateKind.RZ, qubits=(2,), angle=-1.3),
            GateOp(kind=GateKind.CRY, qubits=(2, 0), angle=2.1),
            GateOp(kind=GateKind.CNOT, qubits=(0, 2)),
        ):
            state = apply_gate(state, gate)
        assert state.norm() == pytest.approx(1.0, abs=1e-12)

    def test_random_sequences_preserve_norm(self):
        rng = np.random.default_rng(21)
        kinds = list(GateKind)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
            state = StateVector(amps / np.linalg.norm(amps))
            for _ in range(int(rng.integers(1, 101))):
                kind = kinds[int(rng.integers(len(kinds)))]
                arity = 2 if kind in (GateKind.CRY, GateKind.CNOT) else 1
                qubits = tuple(int(q) for q in rng.choice(n, size=arity, replace=False))
                angle = float(rng.uniform(-2 * np.pi, 2 * np.pi)) if kind in PARAMETRIC_KINDS else None
                state = apply_gate(state, GateOp(kind=kind, qubits=qubits, angle=angle))
            assert state.norm() == pytest.approx(1.0, abs=1e-10)

    def test_matches_dense_operator(self):
        rng = np.random.default_rng(11)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        state = StateVector(amps / np.linalg.norm(amps))
        gate = GateOp(kind=GateKind.CRY, qubits=(0, 2), angle=0.9)
        # CRY(q0 -> q2) as a dense 8x8 operator: identity block when q0 = 0
        ry = ry_matrices(0.9)
        dense = np.kron(np.diag([1, 0]), np.eye(4)) + np.kron(np.diag([0, 1]), np.kron(np.eye(2), ry))
        assert_allclose(apply_gate(state, gate).amplitudes, dense @ state.amplitudes, atol=1e-12)

    def test_unbound_gate_rejected(self):
        with pytest.raises(CircuitError):
            apply_gate(StateVector.zero(1), GateOp(kind=GateKind.RY, qubits=(0,), slot="t0"))

    def test_qubit_out_of_range(self):
        with pytest.raises(CircuitError):
            apply_gate(StateVector.zero(2), GateOp(kind=GateKind.H, qubits=(2,)))

    def test_batched_rows_get_their_own_matrix(self):
        batch = np.zeros((3, 2), dtype=np.complex128)
        batch[:, 0] = 1.0
        angles = np.array([0.0, np.pi, np.pi / 2])
        out = apply_matrices(batch, ry_matrices(angles), [0], 1)
        assert_allclose(np.abs(out) ** 2, [[1, 0], [0, 1], [0.5, 0.5]], atol=1e-12)


class TestGateMatrices:
    def test_rotations_are_unitary(self):
        for matrix in (ry_matrices(0.4), rz_matrices(1.7), cry_matrices(-2.2)):
            assert_allclose(matrix @ matrix.conj().T, np.eye(matrix.shape[0]), atol=1e-12)

    @pytest.mark.parametrize("build", [ry_matrices, rz_matrices, cry_matrices])
    def test_random_angles_are_unitary(self, build):
        angles = np.random.default_rng(4).uniform(-4 * np.pi, 4 * np.pi, size=50)
        matrices = build(angles)
        eye = np.broadcast_to(np.eye(matrices.shape[-1]), matrices.shape)
        assert_allclose(matrices.conj().swapaxes(-1, -2) @ matrices, eye, atol=1e-12)

    def test_cnot_and_hadamard(self):
        assert_allclose(HADAMARD @ HADAMARD, np.eye(2), atol=1e-12)
        assert_allclose(CNOT @ CNOT, np.eye(4), atol=1e-12)

    def test_pauli_decompose_recovers_operator(self):
        matrix = np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, -0.7]])
        coeffs = pauli_decompose(matrix)
        rebuilt = sum(c * pauli_matrix(p) for p, c in coeffs.items())
        assert_allclose(rebuilt, matrix, atol=1e-12)

    def test_pauli_decompose_rejects_wide_operator(self):
        with pytest.raises(DimensionError):
            pauli_decompose(np.eye(4))


class TestExpectation:
    def test_z_on_zero(self):
        assert expectation(StateVector.zero(1), PauliObservable(factors="Z")) == pytest.approx(1.0)

    def test_x_on_plus(self):
        plus = apply_gate(StateVector.zero(1), GateOp(kind=GateKind.H, qubits=(0,)))
        assert expectation(plus, PauliObservable(factors="X")) == pytest.approx(1.0)

    def test_zz_on_bell(self):
        assert expectation(bell_state(), PauliObservable(factors="ZZ")) == pytest.approx(1.0)

    def test_matches_dense_pauli_string(self):
        rng = np.random.default_rng(5)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        state = StateVector(amps / np.linalg.norm(amps))
        dense = np.vdot(state.amplitudes, pauli_matrix("XYZ") @ state.amplitudes).real
        assert expectation(state, PauliObservable(factors="XYZ")) == pytest.approx(dense, abs=1e-12)

    def test_width_mismatch(self):
        with pytest.raises(DimensionError):
            expectation(StateVector.zero(2), PauliObservable(factors="Z"))


class TestProbabilities:
    def test_zero_state(self):
        assert_allclose(probabilities(StateVector.zero(1)), [1, 0])

    def test_plus_state(self):
        plus = apply_gate(StateVector.zero(1), GateOp(kind=GateKind.H, qubits=(0,)))
        assert_allclose(probabilities(plus), [0.5, 0.5], atol=1e-12)

    def test_bell_state(self):
        assert_allclose(probabilities(bell_state()), [0.5, 0, 0, 0.5], atol=1e-12)

    def test_marginals_follow_msb_order(self):
        # |01>: qubit 0 reads 0, qubit 1 reads 1
        probs = np.array([[0.0, 1.0, 0.0, 0.0]])
        assert_allclose(marginal_ones(probs, 2), [[0.0, 1.0]])


class TestEigenstates:
    def test_plus(self):
        assert_allclose(prepare_eigenstate("+").amplitudes, [SQRT_HALF, SQRT_HALF])

    def test_plus_i(self):
        assert_allclose(prepare_eigenstate("+i").amplitudes, [SQRT_HALF, 1j * SQRT_HALF])

    @pytest.mark.parametrize("label,pauli,value", [
        ("0", "Z", 1), ("1", "Z", -1), ("+", "X", 1), ("-", "X", -1), ("+i", "Y", 1), ("-i", "Y", -1),
    ])
    def test_eigen_relations(self, label, pauli, value):
        state = prepare_eigenstate(label)
        assert expectation(state, PauliObservable(factors=pauli)) == pytest.approx(value)

    def test_ket_notation(self):
        assert parse_eigenstate("|−i⟩") == EigenstateLabel.MINUS_I
        assert parse_eigenstate("|+>") == EigenstateLabel.PLUS

    def test_unknown_label(self):
        with pytest.raises(CircuitError):
            prepare_eigenstate("+j")


class TestStateVector:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(DimensionError):
            StateVector(np.ones(3))

    def test_amplitudes_are_read_only(self):
        state = StateVector.zero(2)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0

    def test_kron_puts_first_state_on_high_bits(self):
        one = StateVector(np.array([0, 1]))
        state = kron(one, StateVector.zero(1))
        assert_allclose(state.amplitudes, [0, 0, 1, 0])
