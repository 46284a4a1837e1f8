"""
Wire Cutting: Test Suite
========================

Splitting, fragment execution and reconstruction, always checked against the
uncut simulation of the same circuit.
"""

import sys
import os

# Ensure we can import from root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from core_logic import bell_circuit, verify_cut
from models.config import VerifyConfig
from models.errors import CutError, DimensionError
from models.schemas import (
    Circuit,
    CutSpec,
    EigenstateLabel,
    EncodingSpec,
    Fragment,
    FragmentRole,
    GateKind,
    GateOp,
    SlotRole,
)
from quantum.circuit import bind, build_qcnn_circuit, decompose_cry, free_slot_ids, run
from quantum.cutting import (
    ReconstructionPlan,
    cut_terms,
    default_cut,
    execute_downstream,
    execute_upstream,
    normalize_distribution,
    pair_fragments,
    plan_for,
    qubit_requirements,
    reconstruct_expectation,
    reconstruct_probabilities,
    split,
    split_columns,
    term_contributions,
)
from quantum.statevector import pauli_decompose, pauli_matrix, prepare_eigenstate, probabilities

BELL_CUT = CutSpec(wire=0, position=1)


def term(index: int):
    return cut_terms()[index - 1]


def random_ansatz(n_qubits: int, seed: int) -> Circuit:
    template = build_qcnn_circuit(EncodingSpec(n_features=n_qubits))
    rng = np.random.default_rng(seed)
    n_theta = len(free_slot_ids(template, SlotRole.TRAINABLE))
    return bind(template, rng.uniform(0, np.pi, n_qubits), rng.uniform(-np.pi, np.pi, n_theta))


def idle_wire_plan() -> ReconstructionPlan:
    return plan_for(Circuit(n_qubits=1), CutSpec(wire=0, position=0))


class TestCutTerms:
    def test_eight_terms_in_order(self):
        terms = cut_terms()
        assert [t.index for t in terms] == list(range(1, 9))
        assert [t.observable for t in terms] == ["I", "I", "X", "X", "Y", "Y", "Z", "Z"]

    def test_first_term(self):
        assert (term(1).observable, term(1).eigenstate, term(1).coefficient) == ("I", EigenstateLabel.ZERO, 0.5)

    def test_fourth_term(self):
        assert (term(4).observable, term(4).eigenstate, term(4).coefficient) == ("X", EigenstateLabel.MINUS, -0.5)

    def test_plan_needs_eight_terms(self):
        pair = split(bell_circuit(), BELL_CUT)
        with pytest.raises(ValidationError):
            ReconstructionPlan(pair=pair, terms=cut_terms()[:7])

    def test_terms_resolve_random_density_matrices(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            rho = a @ a.conj().T
            rho /= np.trace(rho)
            rebuilt = np.zeros((2, 2), dtype=np.complex128)
            for t in cut_terms():
                psi = prepare_eigenstate(t.eigenstate).amplitudes
                rebuilt += t.coefficient * np.trace(pauli_matrix(t.observable) @ rho) * np.outer(psi, psi.conj())
            assert_allclose(rebuilt, rho, atol=1e-12)
            coefficients = pauli_decompose(rho)
            assert_allclose(sum(c * pauli_matrix(p) for p, c in coefficients.items()), rho, atol=1e-12)


class TestSplit:
    def test_bell(self):
        pair = split(bell_circuit(), BELL_CUT)
        assert pair.upstream.circuit.n_qubits == 1
        assert [g.kind for g in pair.upstream.circuit.gates] == [GateKind.H]
        assert pair.downstream.circuit.n_qubits == 2
        assert pair.downstream.circuit.gates == (GateOp(kind=GateKind.CNOT, qubits=(0, 1)),)
        assert pair.downstream.qubit_map == (0, 1)

    def test_eight_qubit_default_cut(self):
        circuit = build_qcnn_circuit(EncodingSpec(n_features=8))
        cut = default_cut(circuit)
        assert cut.wire == 4
        pair = split(circuit, cut)
        assert qubit_requirements(pair) == {"uncut": 8, "upstream": 5, "downstream": 4, "max_fragment": 5}
        assert pair.upstream.qubit_map == (0, 1, 2, 3, 4)
        assert pair.downstream.qubit_map == (4, 5, 6, 7)

    def test_default_cut_on_compiled_circuit(self):
        circuit = decompose_cry(build_qcnn_circuit(EncodingSpec(n_features=8)))
        pair = split(circuit, default_cut(circuit))
        assert (pair.upstream.circuit.n_qubits, pair.downstream.circuit.n_qubits) == (5, 4)

    def test_every_gate_lands_on_one_side(self):
        circuit = decompose_cry(build_qcnn_circuit(EncodingSpec(n_features=6)))
        cut = default_cut(circuit)
        pair = split(circuit, cut)
        assert len(pair.upstream.circuit.gates) + len(pair.downstream.circuit.gates) == len(circuit.gates)
        up, down = split_columns(circuit, cut)
        assert sorted(up.tolist() + down.tolist()) == list(range(len(circuit.parametric_gates)))

    def test_mid_kernel_cut(self):
        circuit = build_qcnn_circuit(EncodingSpec(n_features=8))
        # encoding takes 16 gates; kernel (q3, q4) occupies 31..35 with its CNOT at 33
        with pytest.raises(CutError):
            split(circuit, CutSpec(wire=4, position=33))

    def test_wire_out_of_range(self):
        with pytest.raises(CutError):
            split(bell_circuit(), CutSpec(wire=2, position=0))

    def test_position_out_of_range(self):
        with pytest.raises(CutError):
            split(bell_circuit(), CutSpec(wire=0, position=5))

    def test_two_layer_ladder_cannot_be_cut_once(self):
        circuit = build_qcnn_circuit(EncodingSpec(n_features=4), layers=2)
        with pytest.raises(CutError):
            split(circuit, default_cut(circuit))


class TestFragmentExecution:
    def test_upstream_plus_in_x(self):
        pair = split(bell_circuit(), BELL_CUT)
        assert execute_upstream(pair.upstream, term(3)) == pytest.approx(1.0)

    def test_idle_upstream_in_z(self):
        pair = idle_wire_plan().pair
        assert execute_upstream(pair.upstream, term(7)) == pytest.approx(1.0)

    def test_idle_upstream_in_x(self):
        pair = idle_wire_plan().pair
        assert execute_upstream(pair.upstream, term(3)) == pytest.approx(0.0, abs=1e-12)

    def test_upstream_projector_and_pauli_requests(self):
        circuit = Circuit(n_qubits=2, gates=(
            GateOp(kind=GateKind.RY, qubits=(0,), angle=np.pi),
            GateOp(kind=GateKind.H, qubits=(1,)),
        ))
        upstream = split(circuit, CutSpec(wire=1, position=2)).upstream
        assert execute_upstream(upstream, term(1), "1") == pytest.approx(1.0)
        assert execute_upstream(upstream, term(1), "0") == pytest.approx(0.0, abs=1e-12)
        assert execute_upstream(upstream, term(3), "1") == pytest.approx(1.0)
        assert execute_upstream(upstream, term(7), "1") == pytest.approx(0.0, abs=1e-12)
        assert execute_upstream(upstream, term(1), "Z") == pytest.approx(-1.0)

    def test_upstream_request_width(self):
        pair = split(bell_circuit(), BELL_CUT)
        with pytest.raises(DimensionError):
            execute_upstream(pair.upstream, term(1), "01")

    def test_downstream_cnot_from_zero(self):
        pair = split(bell_circuit(), BELL_CUT)
        assert execute_downstream(pair.downstream, term(1), "ZZ") == pytest.approx(1.0)

    def test_downstream_cnot_from_one(self):
        pair = split(bell_circuit(), BELL_CUT)
        assert execute_downstream(pair.downstream, term(2), "ZZ") == pytest.approx(1.0)

    def test_downstream_plus_in_z(self):
        pair = idle_wire_plan().pair
        assert execute_downstream(pair.downstream, term(3), "Z") == pytest.approx(0.0, abs=1e-12)

    def test_downstream_distribution(self):
        pair = split(bell_circuit(), BELL_CUT)
        assert_allclose(execute_downstream(pair.downstream, term(2)), [0, 0, 0, 1], atol=1e-12)

    def test_pairing_matching_fragments(self):
        circuit = random_ansatz(6, seed=2)
        pair = split(circuit, default_cut(circuit))
        assert pair_fragments(pair.upstream, pair.downstream) == pair

    def test_pairing_rejects_different_cuts(self):
        circuit = bell_circuit()
        early, late = split(circuit, CutSpec(wire=0, position=0)), split(circuit, BELL_CUT)
        with pytest.raises(CutError):
            pair_fragments(late.upstream, early.downstream)

    def test_pairing_rejects_different_widths(self):
        cut = CutSpec(wire=0, position=0)
        narrow, wide = split(Circuit(n_qubits=2), cut), split(Circuit(n_qubits=3), cut)
        with pytest.raises(CutError):
            pair_fragments(narrow.upstream, wide.downstream)

    def test_pairing_rejects_foreign_qubit_map(self):
        cut = CutSpec(wire=0, position=0)
        downstream = split(Circuit(n_qubits=2), cut).downstream
        upstream = Fragment(role=FragmentRole.UPSTREAM, circuit=Circuit(n_qubits=1), cut=cut,
                            n_qubits_original=2, qubit_map=(1,))
        with pytest.raises(CutError):
            pair_fragments(upstream, downstream)

    def test_wrong_role(self):
        pair = split(bell_circuit(), BELL_CUT)
        with pytest.raises(CutError):
            execute_upstream(pair.downstream, term(1))
        with pytest.raises(CutError):
            execute_downstream(pair.upstream, term(1))


class TestReconstruction:
    def test_bell_zz(self):
        assert reconstruct_expectation(plan_for(bell_circuit(), BELL_CUT), "ZZ") == pytest.approx(1.0)

    def test_bell_xx(self):
        assert reconstruct_expectation(plan_for(bell_circuit(), BELL_CUT), "XX") == pytest.approx(1.0)

    def test_bell_yy(self):
        assert reconstruct_expectation(plan_for(bell_circuit(), BELL_CUT), "YY") == pytest.approx(-1.0)

    def test_idle_wire_term_contributions(self):
        values = term_contributions(idle_wire_plan(), "Z")
        assert_allclose(values, [0.5, -0.5, 0, 0, 0, 0, 0.5, 0.5], atol=1e-12)
        assert values.sum() == pytest.approx(1.0)

    def test_observable_width(self):
        with pytest.raises(DimensionError):
            reconstruct_expectation(plan_for(bell_circuit(), BELL_CUT), "Z")

    def test_bell_distribution(self):
        probs = reconstruct_probabilities(plan_for(bell_circuit(), BELL_CUT))
        assert_allclose(probs, [0.5, 0, 0, 0.5], atol=1e-9)

    def test_product_distribution(self):
        circuit = Circuit(n_qubits=2, gates=(
            GateOp(kind=GateKind.H, qubits=(0,)),
            GateOp(kind=GateKind.H, qubits=(1,)),
        ))
        probs = reconstruct_probabilities(plan_for(circuit, CutSpec(wire=0, position=1)))
        assert_allclose(probs, [0.25] * 4, atol=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_ansatz_matches_uncut(self, seed):
        circuit = random_ansatz(8, seed)
        cut_probs = reconstruct_probabilities(plan_for(circuit))
        assert_allclose(cut_probs, probabilities(run(circuit)), atol=1e-9)

    def test_expectation_matches_uncut(self):
        circuit = random_ansatz(6, 21)
        uncut = probabilities(run(circuit))
        signs = np.array([(-1) ** bin(k).count("1") for k in range(64)])
        assert reconstruct_expectation(plan_for(circuit), "ZZZZZZ") == pytest.approx(float(signs @ uncut), abs=1e-9)

    def test_thread_pool_gives_identical_result(self):
        plan = plan_for(random_ansatz(8, 7))
        assert_array_equal(reconstruct_probabilities(plan, max_workers=4), reconstruct_probabilities(plan))

    def test_corrupted_terms_break_reconstruction(self):
        circuit = random_ansatz(4, 3)
        corrupted = list(cut_terms())
        corrupted[3] = corrupted[3].model_copy(update={"coefficient": 0.5})
        probs = reconstruct_probabilities(plan_for(circuit, terms=corrupted))
        assert np.max(np.abs(probs - probabilities(run(circuit)))) > 1e-3

    def test_normalize_distribution(self):
        assert_allclose(normalize_distribution(np.array([-1e-17, 0.5, 0.5])), [0, 0.5, 0.5])


class TestVerifyCut:
    def test_default_ansatz_passes(self):
        report = verify_cut(VerifyConfig(trials=10))
        assert report.passed
        assert report.max_deviation < 1e-8
        assert report.qubit_requirements["max_fragment"] == 5

    def test_bell_passes(self):
        report = verify_cut(VerifyConfig(circuit="bell", trials=2))
        assert report.passed
        assert report.n_qubits == 2

    def test_corrupted_table_fails(self):
        corrupted = list(cut_terms())
        corrupted[6] = corrupted[6].model_copy(update={"coefficient": -0.5})
        report = verify_cut(VerifyConfig(trials=3), terms=corrupted)
        assert not report.passed
