"""
Circuit document format.

    {
      "version": 1,
      "n_qubits": 2,
      "gates": [{"kind": "RY", "qubits": [0], "angle": "0.5", "slot": "t0", "scale": "1"}],
      "slots": [{"id": "t0", "role": "trainable"}],
      "fragment": {"role": "upstream", "wire": 0, "position": 1,
                   "n_qubits_original": 2, "qubit_map": [0]}
    }

Angles and scales are decimal strings with 17 significant digits, which
round-trips every double exactly. `fragment` is present only for fragments.
"""

import json
import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from models.errors import CircuitFormatError
from models.schemas import (
    Circuit,
    CutSpec,
    Fragment,
    FragmentPair,
    FragmentRole,
    GateKind,
    GateOp,
    Slot,
    SlotRole,
)
from quantum.cutting import pair_fragments

DOCUMENT_VERSION = 1


class GateRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: GateKind
    qubits: List[int]
    angle: Optional[str] = None
    slot: Optional[str] = None
    scale: str = "1"


class SlotRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    role: SlotRole


class FragmentRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    role: FragmentRole
    wire: int
    position: int
    n_qubits_original: int
    qubit_map: List[int]


class CircuitDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: int = Field(DOCUMENT_VERSION)
    n_qubits: int
    gates: List[GateRecord] = Field(default_factory=list)
    slots: List[SlotRecord] = Field(default_factory=list)
    fragment: Optional[FragmentRecord] = None


def format_decimal(value: float) -> str:
    if not math.isfinite(value):
        raise CircuitFormatError(f"non-finite angle {value!r}")
    return format(value, ".17g")


def _parse_decimal(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CircuitFormatError(f"{what} '{text}' is not a decimal number") from None
    if not math.isfinite(value):
        raise CircuitFormatError(f"{what} '{text}' is not finite")
    return value


def _to_document(circuit: Circuit, fragment: Optional[FragmentRecord] = None) -> CircuitDocument:
    gates = [
        GateRecord(
            kind=gate.kind,
            qubits=list(gate.qubits),
            angle=None if gate.angle is None else format_decimal(gate.angle),
            slot=gate.slot,
            scale=format_decimal(gate.scale),
        )
        for gate in circuit.gates
    ]
    slots = [SlotRecord(id=slot.id, role=slot.role) for slot in circuit.slots]
    return CircuitDocument(n_qubits=circuit.n_qubits, gates=gates, slots=slots, fragment=fragment)


def _from_document(doc: CircuitDocument) -> Circuit:
    if doc.version != DOCUMENT_VERSION:
        raise CircuitFormatError(f"unsupported document version {doc.version}")
    known = {slot.id for slot in doc.slots}
    gates = []
    for index, record in enumerate(doc.gates):
        if record.slot is not None and record.slot not in known:
            raise CircuitFormatError(f"gate {index} references dangling slot '{record.slot}'")
        angle = None if record.angle is None else _parse_decimal(record.angle, "angle")
        gates.append(GateOp(
            kind=record.kind,
            qubits=tuple(record.qubits),
            angle=angle,
            slot=record.slot,
            scale=_parse_decimal(record.scale, "scale"),
        ))
    slots = tuple(Slot(id=s.id, role=s.role) for s in doc.slots)
    return Circuit(n_qubits=doc.n_qubits, gates=tuple(gates), slots=slots)


def _parse(text: str) -> CircuitDocument:
    try:
        return CircuitDocument.model_validate_json(text)
    except ValidationError as exc:
        raise CircuitFormatError(f"malformed circuit document: {exc.errors()[0]['msg']}") from exc


def serialize(circuit: Circuit) -> str:
    return _to_document(circuit).model_dump_json(indent=2, exclude_none=True)


def deserialize(text: str) -> Circuit:
    doc = _parse(text)
    try:
        return _from_document(doc)
    except ValidationError as exc:
        raise CircuitFormatError(f"invalid circuit: {exc.errors()[0]['msg']}") from exc


def serialize_fragment(fragment: Fragment) -> str:
    record = FragmentRecord(
        role=fragment.role,
        wire=fragment.cut.wire,
        position=fragment.cut.position,
        n_qubits_original=fragment.n_qubits_original,
        qubit_map=list(fragment.qubit_map),
    )
    return _to_document(fragment.circuit, record).model_dump_json(indent=2, exclude_none=True)


def deserialize_fragment(text: str) -> Fragment:
    doc = _parse(text)
    if doc.fragment is None:
        raise CircuitFormatError("document has no fragment section")
    try:
        return Fragment(
            role=doc.fragment.role,
            circuit=_from_document(doc),
            cut=CutSpec(wire=doc.fragment.wire, position=doc.fragment.position),
            n_qubits_original=doc.fragment.n_qubits_original,
            qubit_map=tuple(doc.fragment.qubit_map),
        )
    except ValidationError as exc:
        raise CircuitFormatError(f"invalid fragment: {exc.errors()[0]['msg']}") from exc


def serialize_pair(pair: FragmentPair) -> str:
    """Both fragments in one JSON array, upstream first."""
    return json.dumps([json.loads(serialize_fragment(pair.upstream)), json.loads(serialize_fragment(pair.downstream))], indent=2)


def deserialize_pair(text: str) -> FragmentPair:
    try:
        parts = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"malformed pair document: {exc.msg}") from exc
    if not isinstance(parts, list) or len(parts) != 2:
        raise CircuitFormatError("pair document must hold exactly two fragments")
    upstream, downstream = (deserialize_fragment(json.dumps(part)) for part in parts)
    try:
        return pair_fragments(upstream, downstream)
    except ValidationError as exc:
        raise CircuitFormatError(f"invalid fragment pair: {exc.errors()[0]['msg']}") from exc
