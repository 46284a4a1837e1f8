"""
Statevector Core
================

Exact simulation of pure states over at most a few dozen qubits.

Qubit 0 is the most significant bit of the basis index, so an n-qubit
amplitude vector reshaped to (2,) * n has qubit i on axis i. Gates are applied
by moving the target axes to the front and contracting with the small gate
matrix; the 2^n x 2^n operator is never built.

Every routine also accepts a batch: a (B, 2^n) table of independent states,
each row optionally with its own gate matrix. Training and cut reconstruction
run hundreds of closely related circuits at once this way.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Union

import numpy as np

from models.errors import CircuitError, DimensionError
from models.schemas import EigenstateLabel, GateKind, GateOp, PauliObservable

_SQRT_HALF = 1.0 / np.sqrt(2.0)


# ============================================================================
# GATE MATRICES
# ============================================================================

PAULI_MATRICES: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

HADAMARD = _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128)

CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=np.complex128,
)


def ry_matrices(angles: np.ndarray) -> np.ndarray:
    """RY(θ) = exp(-iθY/2) for every angle; shape (B, 2, 2)."""
    half = np.asarray(angles, dtype=np.float64) / 2.0
    c, s = np.cos(half), np.sin(half)
    out = np.empty(half.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rz_matrices(angles: np.ndarray) -> np.ndarray:
    """RZ(φ) = diag(e^{-iφ/2}, e^{iφ/2}) for every angle; shape (B, 2, 2)."""
    half = np.asarray(angles, dtype=np.float64) / 2.0
    out = np.zeros(half.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = np.exp(-1j * half)
    out[..., 1, 1] = np.exp(1j * half)
    return out


def cry_matrices(angles: np.ndarray) -> np.ndarray:
    """Controlled RY: identity block on control |0>, RY on control |1>."""
    ry = ry_matrices(angles)
    out = np.zeros(ry.shape[:-2] + (4, 4), dtype=np.complex128)
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    out[..., 2:, 2:] = ry
    return out


_PARAMETRIC = {
    GateKind.RY: ry_matrices,
    GateKind.RZ: rz_matrices,
    GateKind.CRY: cry_matrices,
}

_FIXED = {
    GateKind.H: HADAMARD,
    GateKind.CNOT: CNOT,
}


def gate_matrices(kind: GateKind, angles: Union[float, np.ndarray, None] = None) -> np.ndarray:
    """
    Matrix (or stack of matrices, one per angle) of a gate kind.
    Fixed gates ignore `angles` and return a single matrix.
    """
    if kind in _FIXED:
        return _FIXED[kind]
    if angles is None:
        raise CircuitError(f"{kind.value} needs an angle")
    return _PARAMETRIC[kind](angles)


def gate_matrix(gate: GateOp) -> np.ndarray:
    """Unitary of a single bound gate."""
    if not gate.is_bound:
        raise CircuitError(f"{gate.kind.value} on {gate.qubits} has an unbound slot '{gate.slot}'")
    return gate_matrices(gate.kind, gate.angle)


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string (qubit 0 leftmost)."""
    out = np.ones((1, 1), dtype=np.complex128)
    for factor in label:
        out = np.kron(out, PAULI_MATRICES[factor])
    return out


def pauli_decompose(matrix: np.ndarray) -> Dict[str, complex]:
    """Coefficients Tr(P·M)/2 of a single-qubit operator in the {I, X, Y, Z} basis."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 operator, got shape {matrix.shape}")
    return {label: complex(np.trace(p @ matrix) / 2.0) for label, p in PAULI_MATRICES.items()}


# ============================================================================
# STATE VECTOR
# ============================================================================

@dataclass(frozen=True)
class StateVector:
    """Immutable pure state of n qubits."""
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        size = amps.shape[0]
        if size < 2 or size & (size - 1):
            raise DimensionError(f"amplitude count {size} is not a power of two >= 2")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        if n_qubits < 1:
            raise DimensionError("a state needs at least one qubit")
        amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def kron(*states: StateVector) -> StateVector:
    """Tensor product; the first state holds the most significant qubits."""
    amps = np.ones(1, dtype=np.complex128)
    for state in states:
        amps = np.kron(amps, state.amplitudes)
    return StateVector(amps)


# ============================================================================
# GATE APPLICATION
# ============================================================================

def apply_matrices(batch: np.ndarray, matrices: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """
    Apply a k-qubit gate to every row of a (B, 2^n) amplitude table.

    `matrices` is either one (2^k, 2^k) matrix shared by all rows or a
    (B, 2^k, 2^k) stack with one matrix per row. The first listed qubit is the
    most significant bit of the gate's own basis.
    """
    k = len(qubits)
    rows = batch.shape[0]
    axes = [q + 1 for q in qubits]
    front = list(range(1, k + 1))
    tensor = np.moveaxis(batch.reshape((rows,) + (2,) * n_qubits), axes, front)
    moved_shape = tensor.shape
    flat = tensor.reshape(rows, 2 ** k, -1)
    out = np.matmul(matrices, flat).reshape(moved_shape)
    return np.moveaxis(out, front, axes).reshape(rows, -1)


def _check_qubits(gate: GateOp, n_qubits: int) -> None:
    if any(q >= n_qubits for q in gate.qubits):
        raise CircuitError(f"{gate.kind.value} on {gate.qubits} exceeds {n_qubits} qubit(s)")
    if len(set(gate.qubits)) != len(gate.qubits):
        raise CircuitError(f"{gate.kind.value} control and target must differ")


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Return the state with one bound gate applied."""
    _check_qubits(gate, state.n_qubits)
    matrix = gate_matrix(gate)
    out = apply_matrices(state.amplitudes[None, :], matrix, gate.qubits, state.n_qubits)
    return StateVector(out[0])


# ============================================================================
# MEASUREMENT
# ============================================================================

def apply_pauli_string(batch: np.ndarray, factors: str) -> np.ndarray:
    """P|ψ> for every row; identity factors are skipped."""
    n_qubits = len(factors)
    out = batch
    for qubit, factor in enumerate(factors):
        if factor != "I":
            out = apply_matrices(out, PAULI_MATRICES[factor], [qubit], n_qubits)
    return out


def expectation_batch(batch: np.ndarray, factors: str) -> np.ndarray:
    """<ψ|P|ψ> for every row of a (B, 2^n) table."""
    if 2 ** len(factors) != batch.shape[1]:
        raise DimensionError(f"observable on {len(factors)} qubit(s) does not match {batch.shape[1]} amplitudes")
    values = np.einsum("bi,bi->b", batch.conj(), apply_pauli_string(batch, factors))
    return values.real


def expectation(state: StateVector, obs: PauliObservable) -> float:
    """<ψ|O|ψ> for a Pauli string observable."""
    if obs.n_qubits != state.n_qubits:
        raise DimensionError(f"observable has {obs.n_qubits} qubit(s), state has {state.n_qubits}")
    return float(expectation_batch(state.amplitudes[None, :], obs.factors)[0])


def probabilities_batch(batch: np.ndarray) -> np.ndarray:
    return np.abs(batch) ** 2


def probabilities(state: StateVector) -> np.ndarray:
    """Computational-basis distribution, entry b = |amplitude_b|^2."""
    return probabilities_batch(state.amplitudes)


def marginal_ones(probs: np.ndarray, n_qubits: int) -> np.ndarray:
    """P(qubit i reads 1) for every qubit, from (B, 2^n) distributions."""
    rows = probs.shape[0]
    tensor = probs.reshape((rows,) + (2,) * n_qubits)
    out = np.empty((rows, n_qubits))
    for qubit in range(n_qubits):
        other = tuple(a for a in range(1, n_qubits + 1) if a != qubit + 1)
        out[:, qubit] = tensor.sum(axis=other)[:, 1]
    return out


# ============================================================================
# PAULI EIGENSTATES
# ============================================================================

EIGENSTATES: Dict[EigenstateLabel, np.ndarray] = {
    EigenstateLabel.ZERO: np.array([1, 0], dtype=np.complex128),
    EigenstateLabel.ONE: np.array([0, 1], dtype=np.complex128),
    EigenstateLabel.PLUS: np.array([_SQRT_HALF, _SQRT_HALF], dtype=np.complex128),
    EigenstateLabel.MINUS: np.array([_SQRT_HALF, -_SQRT_HALF], dtype=np.complex128),
    EigenstateLabel.PLUS_I: np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=np.complex128),
    EigenstateLabel.MINUS_I: np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=np.complex128),
}

# (Pauli, eigenvalue) each prepared state satisfies.
EIGEN_RELATIONS: Dict[EigenstateLabel, tuple] = {
    EigenstateLabel.ZERO: ("Z", 1),
    EigenstateLabel.ONE: ("Z", -1),
    EigenstateLabel.PLUS: ("X", 1),
    EigenstateLabel.MINUS: ("X", -1),
    EigenstateLabel.PLUS_I: ("Y", 1),
    EigenstateLabel.MINUS_I: ("Y", -1),
}


def parse_eigenstate(label: Union[str, EigenstateLabel]) -> EigenstateLabel:
    """Accepts '+i', '|+i>', '|−i⟩' and the enum itself."""
    if isinstance(label, EigenstateLabel):
        return label
    text = str(label).strip().strip("|").rstrip(">⟩〉").replace("−", "-")
    try:
        return EigenstateLabel(text)
    except ValueError:
        raise CircuitError(f"unknown eigenstate label '{label}'") from None


def prepare_eigenstate(label: Union[str, EigenstateLabel]) -> StateVector:
    """One of |0>, |1>, |+>, |->, |+i>, |-i>."""
    return StateVector(EIGENSTATES[parse_eigenstate(label)])


def product_states(first: Iterable[np.ndarray], rest_qubits: int) -> np.ndarray:
    """Rows of (single-qubit state) ⊗ |0...0> over `rest_qubits` further qubits."""
    tail = np.zeros(2 ** rest_qubits, dtype=np.complex128)
    tail[0] = 1.0
    return np.stack([np.kron(vec, tail) for vec in first])
