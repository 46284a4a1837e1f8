"""
Pydantic Schemas for the distributed QCNN toolkit.
Defines gates, circuits with symbolic parameter slots, Pauli observables,
cut specifications and the fragments produced by a wire cut.

Qubit 0 is the most significant bit of every basis-state index.
"""

from enum import Enum
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class GateKind(str, Enum):
    """Gate families supported by the simulator."""
    H = "H"
    RY = "RY"
    RZ = "RZ"
    CRY = "CRY"
    CNOT = "CNOT"


GATE_ARITY = {
    GateKind.H: 1,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.CRY: 2,
    GateKind.CNOT: 2,
}

PARAMETRIC_KINDS = frozenset({GateKind.RY, GateKind.RZ, GateKind.CRY})


class SlotRole(str, Enum):
    """What a symbolic angle slot is bound from."""
    ENCODING = "encoding"
    TRAINABLE = "trainable"


class GateOp(BaseModel):
    """
    A single gate. Two-qubit gates list the control first.
    A parametric gate carries a literal `angle`, a symbolic `slot`, or both
    once bound (the slot is kept for gradient bookkeeping). The effective
    angle is `scale * slot value`.
    """
    model_config = ConfigDict(frozen=True)

    kind: GateKind
    qubits: Tuple[int, ...] = Field(..., description="Target qubit(s); control first for CRY/CNOT")
    angle: Optional[float] = Field(None, description="Literal angle in radians")
    slot: Optional[str] = Field(None, description="Symbolic slot id")
    scale: float = Field(1.0, description="Multiplier applied to the slot value")

    @model_validator(mode="after")
    def _check_shape(self) -> "GateOp":
        arity = GATE_ARITY[self.kind]
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind.value} acts on {arity} qubit(s), got {len(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind.value} control and target must differ")
        if self.kind in PARAMETRIC_KINDS:
            if self.angle is None and self.slot is None:
                raise ValueError(f"{self.kind.value} needs an angle or a slot")
        elif self.angle is not None or self.slot is not None:
            raise ValueError(f"{self.kind.value} takes no parameter")
        return self

    @property
    def is_parametric(self) -> bool:
        return self.kind in PARAMETRIC_KINDS

    @property
    def is_bound(self) -> bool:
        return not self.is_parametric or self.angle is not None


class Slot(BaseModel):
    """Entry of a circuit's slot table."""
    model_config = ConfigDict(frozen=True)

    id: str
    role: SlotRole


class Circuit(BaseModel):
    """
    Ordered gate sequence over `n_qubits` wires plus the slot table.
    Circuits are immutable; builders and transforms return new instances.
    """
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(..., ge=1)
    gates: Tuple[GateOp, ...] = ()
    slots: Tuple[Slot, ...] = ()

    @model_validator(mode="after")
    def _check_references(self) -> "Circuit":
        ids = [slot.id for slot in self.slots]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate slot ids")
        known = set(ids)
        for index, gate in enumerate(self.gates):
            if any(q >= self.n_qubits for q in gate.qubits):
                raise ValueError(f"gate {index} ({gate.kind.value}) uses qubit outside 0..{self.n_qubits - 1}")
            if gate.slot is not None and gate.slot not in known:
                raise ValueError(f"gate {index} references unknown slot '{gate.slot}'")
        return self

    def slot_ids(self, role: SlotRole) -> Tuple[str, ...]:
        return tuple(slot.id for slot in self.slots if slot.role == role)

    @property
    def parametric_gates(self) -> Tuple[int, ...]:
        """Indices of the gates that take an angle."""
        return tuple(i for i, gate in enumerate(self.gates) if gate.is_parametric)

    @property
    def is_bound(self) -> bool:
        return all(gate.is_bound for gate in self.gates)


class KernelGate(BaseModel):
    """One gate of a two-wire kernel template; wires are local (0 or 1)."""
    model_config = ConfigDict(frozen=True)

    kind: GateKind
    wires: Tuple[int, ...]
    param: Optional[int] = Field(None, description="Index into the kernel's parameters")


def _default_kernel_template() -> Tuple[KernelGate, ...]:
    return (
        KernelGate(kind=GateKind.RY, wires=(0,), param=0),
        KernelGate(kind=GateKind.RY, wires=(1,), param=1),
        KernelGate(kind=GateKind.CNOT, wires=(0, 1)),
        KernelGate(kind=GateKind.RZ, wires=(1,), param=2),
        KernelGate(kind=GateKind.CRY, wires=(0, 1), param=3),
    )


class KernelSpec(BaseModel):
    """
    The quasi-local two-wire convolution kernel.
    Default: RY(a) w0, RY(b) w1, CNOT(w0→w1), RZ(c) w1, CRY(d)(w0→w1).
    """
    model_config = ConfigDict(frozen=True)

    parameter_count: int = Field(4, ge=0)
    template: Tuple[KernelGate, ...] = Field(default_factory=_default_kernel_template)

    @model_validator(mode="after")
    def _check_template(self) -> "KernelSpec":
        used = set()
        for gate in self.template:
            if gate.kind == GateKind.H:
                raise ValueError("kernel gates are drawn from RY, RZ, CRY, CNOT")
            if len(gate.wires) != GATE_ARITY[gate.kind] or any(w not in (0, 1) for w in gate.wires):
                raise ValueError(f"kernel gate {gate.kind.value} has invalid wires {gate.wires}")
            if len(set(gate.wires)) != len(gate.wires):
                raise ValueError("kernel control and target must differ")
            if (gate.kind in PARAMETRIC_KINDS) != (gate.param is not None):
                raise ValueError(f"kernel gate {gate.kind.value} parameter mismatch")
            if gate.param is not None:
                if not 0 <= gate.param < self.parameter_count:
                    raise ValueError(f"kernel parameter index {gate.param} out of range")
                used.add(gate.param)
        if used != set(range(self.parameter_count)):
            raise ValueError("every kernel parameter must be used by the template")
        return self


class FeatureScaling(str, Enum):
    NONE = "none"
    L2_NORMALIZE = "l2-normalize"


class EncodingSpec(BaseModel):
    """Angle encoding: one feature per qubit."""
    model_config = ConfigDict(frozen=True)

    n_features: int = Field(..., description="Equals the qubit count")
    scaling: FeatureScaling = FeatureScaling.NONE


class PauliObservable(BaseModel):
    """Tensor product of single-qubit Paulis; factor i acts on qubit i."""
    model_config = ConfigDict(frozen=True)

    factors: str = Field(..., pattern=r"^[IXYZ]+$")

    @property
    def n_qubits(self) -> int:
        return len(self.factors)


class EigenstateLabel(str, Enum):
    """The six single-qubit Pauli eigenstates."""
    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"
    PLUS_I = "+i"
    MINUS_I = "-i"


class CutSpec(BaseModel):
    """A wire cut: on `wire`, between gate index position-1 and position."""
    model_config = ConfigDict(frozen=True)

    wire: int = Field(..., ge=0)
    position: int = Field(..., ge=0)


class CutTerm(BaseModel):
    """One (observable, eigenstate, coefficient) triple of the Pauli-basis cut."""
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=1, le=8)
    observable: Literal["I", "X", "Y", "Z"]
    eigenstate: EigenstateLabel
    coefficient: float


class FragmentRole(str, Enum):
    UPSTREAM = "upstream"
    DOWNSTREAM = "downstream"


class Fragment(BaseModel):
    """
    One side of a cut circuit.
    `qubit_map[i]` is the original qubit carried by fragment qubit i. The
    upstream's last qubit is the measured cut wire; the downstream's qubit 0
    is the freshly prepared wire.
    """
    model_config = ConfigDict(frozen=True)

    role: FragmentRole
    circuit: Circuit
    cut: CutSpec
    n_qubits_original: int = Field(..., ge=1)
    qubit_map: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_map(self) -> "Fragment":
        if len(self.qubit_map) != self.circuit.n_qubits:
            raise ValueError("qubit_map length must equal the fragment width")
        return self


class FragmentPair(BaseModel):
    """Upstream and downstream fragments of a single wire cut."""
    model_config = ConfigDict(frozen=True)

    upstream: Fragment
    downstream: Fragment

    @model_validator(mode="after")
    def _check_roles(self) -> "FragmentPair":
        if self.upstream.role != FragmentRole.UPSTREAM or self.downstream.role != FragmentRole.DOWNSTREAM:
            raise ValueError("fragment roles must be upstream/downstream")
        if self.upstream.circuit.n_qubits + self.downstream.circuit.n_qubits != self.upstream.n_qubits_original + 1:
            raise ValueError("fragment widths must add up to n + 1")
        return self

    @property
    def n_qubits(self) -> int:
        return self.upstream.n_qubits_original

    @property
    def wire(self) -> int:
        return self.upstream.cut.wire
