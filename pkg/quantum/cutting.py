"""
Wire Cutting
============

Cuts one wire of a circuit into an upstream fragment (the wire is measured
in the X, Y or Z basis at the cut) and a downstream fragment (a fresh wire is
prepared in a Pauli eigenstate), then recombines the fragment results with
the eight Pauli-basis terms:

    rho = sum_m c_m Tr(O_m rho) |psi_m><psi_m|

The eight terms only need three upstream measurement settings (I reuses the
Z statistics) and six downstream preparations. The nine executions are
independent and may run on a thread pool; recombination always sums the
terms in index order so results do not depend on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from models.errors import CutError, DimensionError
from models.schemas import (
    Circuit,
    CutSpec,
    CutTerm,
    EigenstateLabel,
    Fragment,
    FragmentPair,
    FragmentRole,
    PauliObservable,
)
from quantum.circuit import default_slot_values, gate_angle_table, run_batch
from quantum.statevector import (
    EIGENSTATES,
    HADAMARD,
    apply_matrices,
    expectation_batch,
    probabilities_batch,
    product_states,
    rz_matrices,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


# ============================================================================
# CUT TERMS
# ============================================================================

_TERM_TABLE = (
    ("I", EigenstateLabel.ZERO, +0.5),
    ("I", EigenstateLabel.ONE, +0.5),
    ("X", EigenstateLabel.PLUS, +0.5),
    ("X", EigenstateLabel.MINUS, -0.5),
    ("Y", EigenstateLabel.PLUS_I, +0.5),
    ("Y", EigenstateLabel.MINUS_I, -0.5),
    ("Z", EigenstateLabel.ZERO, +0.5),
    ("Z", EigenstateLabel.ONE, -0.5),
)

MEASUREMENT_BASES = ("X", "Y", "Z")
PREPARATIONS = tuple(EIGENSTATES)


def cut_terms() -> Tuple[CutTerm, ...]:
    """The eight (O_m, psi_m, c_m) triples in index order."""
    return tuple(
        CutTerm(index=i, observable=obs, eigenstate=state, coefficient=coef)
        for i, (obs, state, coef) in enumerate(_TERM_TABLE, start=1)
    )


def measurement_basis(observable: str) -> str:
    """Upstream setting that yields statistics for `observable`."""
    return "Z" if observable in ("I", "Z") else observable


class ReconstructionPlan(BaseModel):
    """A fragment pair and the weighted terms that recombine it."""
    model_config = ConfigDict(frozen=True)

    pair: FragmentPair
    terms: Tuple[CutTerm, ...] = cut_terms()
    observable: Optional[PauliObservable] = None

    @field_validator("terms")
    @classmethod
    def _eight_terms(cls, terms):
        if len(terms) != 8:
            raise ValueError(f"a wire cut recombines exactly 8 terms, got {len(terms)}")
        return terms


# ============================================================================
# SPLITTING
# ============================================================================

def _assign_sides(circuit: Circuit, cut: CutSpec) -> Tuple[List[int], List[int]]:
    if cut.wire >= circuit.n_qubits:
        raise CutError(f"cut wire {cut.wire} outside 0..{circuit.n_qubits - 1}")
    if cut.position > len(circuit.gates):
        raise CutError(f"cut position {cut.position} beyond {len(circuit.gates)} gate(s)")
    upstream, downstream = [], []
    for index, gate in enumerate(circuit.gates):
        lo = any(q < cut.wire for q in gate.qubits)
        hi = any(q > cut.wire for q in gate.qubits)
        on_wire = cut.wire in gate.qubits
        before = index < cut.position
        if (lo and hi) or (on_wire and before and hi) or (on_wire and not before and lo):
            raise CutError(f"gate {index} ({gate.kind.value} on {gate.qubits}) spans the cut on wire {cut.wire}")
        if on_wire:
            (upstream if before else downstream).append(index)
        else:
            (upstream if lo else downstream).append(index)
    return upstream, downstream


def _fragment(circuit: Circuit, cut: CutSpec, indices: Sequence[int], role: FragmentRole) -> Fragment:
    if role == FragmentRole.UPSTREAM:
        qubit_map = tuple(range(cut.wire + 1))
        offset = 0
    else:
        qubit_map = tuple(range(cut.wire, circuit.n_qubits))
        offset = cut.wire
    gates = tuple(
        circuit.gates[i].model_copy(update={"qubits": tuple(q - offset for q in circuit.gates[i].qubits)})
        for i in indices
    )
    referenced = {g.slot for g in gates if g.slot is not None}
    slots = tuple(s for s in circuit.slots if s.id in referenced)
    return Fragment(
        role=role,
        circuit=Circuit(n_qubits=len(qubit_map), gates=gates, slots=slots),
        cut=cut,
        n_qubits_original=circuit.n_qubits,
        qubit_map=qubit_map,
    )


def split(circuit: Circuit, cut: CutSpec) -> FragmentPair:
    """
    Upstream keeps the gates on qubits <= wire before the cut; downstream keeps
    the gates on qubits >= wire after it, with the wire renumbered to 0.
    Gates entirely on one side of the wire go to that side wherever they sit.
    """
    up, down = _assign_sides(circuit, cut)
    pair = FragmentPair(
        upstream=_fragment(circuit, cut, up, FragmentRole.UPSTREAM),
        downstream=_fragment(circuit, cut, down, FragmentRole.DOWNSTREAM),
    )
    logger.debug("split %d-qubit circuit at wire %d: %d+%d qubits",
                 circuit.n_qubits, cut.wire, pair.upstream.circuit.n_qubits, pair.downstream.circuit.n_qubits)
    return pair


def pair_fragments(upstream: Fragment, downstream: Fragment) -> FragmentPair:
    """Join two independently loaded fragments; both must come from the same cut of the same circuit."""
    if upstream.cut != downstream.cut:
        raise CutError(
            f"fragments disagree on the cut: upstream {upstream.cut.model_dump()}, "
            f"downstream {downstream.cut.model_dump()}"
        )
    if upstream.n_qubits_original != downstream.n_qubits_original:
        raise CutError(
            f"fragments disagree on the circuit width: {upstream.n_qubits_original} "
            f"vs {downstream.n_qubits_original}"
        )
    pair = FragmentPair(upstream=upstream, downstream=downstream)
    wire, n = pair.wire, pair.n_qubits
    if upstream.qubit_map != tuple(range(wire + 1)) or downstream.qubit_map != tuple(range(wire, n)):
        raise CutError(f"fragment qubit maps do not meet at wire {wire}")
    return pair


def split_columns(circuit: Circuit, cut: CutSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Positions of each fragment's parametric gates within the full circuit's angle table."""
    up, down = _assign_sides(circuit, cut)
    column = {gate_index: col for col, gate_index in enumerate(circuit.parametric_gates)}
    up_cols = np.array([column[i] for i in up if i in column], dtype=np.intp)
    down_cols = np.array([column[i] for i in down if i in column], dtype=np.intp)
    return up_cols, down_cols


def default_cut(circuit: Circuit) -> CutSpec:
    """
    Middle wire n//2, placed right after the last gate joining it to a lower
    qubit. For the 8-qubit one-layer ladder this is after the (q3, q4) kernel,
    giving 5 + 4 qubit fragments.
    """
    if circuit.n_qubits < 2:
        raise CutError("cutting needs at least two qubits")
    wire = circuit.n_qubits // 2
    joins = [i for i, g in enumerate(circuit.gates) if wire in g.qubits and any(q < wire for q in g.qubits)]
    touches = [i for i, g in enumerate(circuit.gates) if wire in g.qubits]
    if joins:
        position = joins[-1] + 1
    elif touches:
        position = touches[0]
    else:
        position = 0
    return CutSpec(wire=wire, position=position)


def plan_for(circuit: Circuit, cut: Optional[CutSpec] = None, terms: Optional[Sequence[CutTerm]] = None) -> ReconstructionPlan:
    cut = cut or default_cut(circuit)
    return ReconstructionPlan(pair=split(circuit, cut), terms=tuple(terms) if terms is not None else cut_terms())


def qubit_requirements(pair: FragmentPair) -> Dict[str, int]:
    up = pair.upstream.circuit.n_qubits
    down = pair.downstream.circuit.n_qubits
    return {"uncut": pair.n_qubits, "upstream": up, "downstream": down, "max_fragment": max(up, down)}


# ============================================================================
# FRAGMENT EXECUTION
# ============================================================================

def _pool_map(fn: Callable[[T], R], items: Iterable[T], max_workers: Optional[int]) -> List[R]:
    items = list(items)
    if max_workers and max_workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _require_role(fragment: Fragment, role: FragmentRole) -> None:
    if fragment.role != role:
        raise CutError(f"expected a {role.value} fragment, got {fragment.role.value}")


def _literal_angles(fragment: Fragment) -> np.ndarray:
    circuit = fragment.circuit
    if not circuit.is_bound:
        raise CutError(f"{fragment.role.value} fragment has unbound slots")
    return gate_angle_table(circuit, *default_slot_values(circuit))


def _basis_rotation(basis: str) -> List[np.ndarray]:
    if basis == "Z":
        return []
    if basis == "X":
        return [HADAMARD]
    if basis == "Y":
        # S-dagger (RZ(-pi/2) up to phase) then H maps the Y eigenbasis onto Z
        return [rz_matrices(-np.pi / 2), HADAMARD]
    raise CutError(f"unknown measurement basis '{basis}'")


def upstream_states(fragment: Fragment, angles: Optional[np.ndarray] = None) -> np.ndarray:
    _require_role(fragment, FragmentRole.UPSTREAM)
    angles = _literal_angles(fragment) if angles is None else angles
    return run_batch(fragment.circuit, angles)


def upstream_setting_probabilities(fragment: Fragment, basis: str, angles: Optional[np.ndarray] = None,
                                   states: Optional[np.ndarray] = None) -> np.ndarray:
    """
    (B, 2^wire, 2) outcome probabilities with the cut wire read in `basis`;
    the last axis is the cut wire's outcome.
    """
    batch = upstream_states(fragment, angles) if states is None else states
    n = fragment.circuit.n_qubits
    for matrix in _basis_rotation(basis):
        batch = apply_matrices(batch, matrix, [n - 1], n)
    return probabilities_batch(batch).reshape(batch.shape[0], 2 ** (n - 1), 2)


def downstream_preparation_probabilities(fragment: Fragment, label: EigenstateLabel,
                                         angles: Optional[np.ndarray] = None) -> np.ndarray:
    """(B, 2^k) distribution of the downstream fragment with its fresh wire in `label`."""
    return probabilities_batch(_downstream_states(fragment, label, angles))


def _downstream_states(fragment: Fragment, label: EigenstateLabel, angles: Optional[np.ndarray]) -> np.ndarray:
    _require_role(fragment, FragmentRole.DOWNSTREAM)
    angles = _literal_angles(fragment) if angles is None else angles
    initial = product_states([EIGENSTATES[label]], fragment.circuit.n_qubits - 1)
    return run_batch(fragment.circuit, angles, initial)


def _as_observable(request: Union[str, PauliObservable]) -> PauliObservable:
    return request if isinstance(request, PauliObservable) else PauliObservable(factors=request)


def execute_upstream(fragment: Fragment, term: CutTerm, upstream_projector: Union[str, PauliObservable] = "") -> float:
    """
    Joint expectation <P_up ⊗ O_m> on the upstream output. `upstream_projector`
    is a bit string (projector onto that outcome of qubits 0..wire-1) or a
    Pauli string on those qubits. An empty request means identity.
    """
    _require_role(fragment, FragmentRole.UPSTREAM)
    width = fragment.circuit.n_qubits - 1
    text = upstream_projector.factors if isinstance(upstream_projector, PauliObservable) else upstream_projector
    if len(text) != width:
        raise DimensionError(f"upstream request covers {len(text)} qubit(s), fragment has {width} besides the cut wire")

    if set(text) <= {"0", "1"} and not isinstance(upstream_projector, PauliObservable):
        probs = upstream_setting_probabilities(fragment, measurement_basis(term.observable))[0]
        row = probs[int(text, 2) if text else 0]
        return float(row[0] + row[1]) if term.observable == "I" else float(row[0] - row[1])

    states = upstream_states(fragment)
    return float(expectation_batch(states, text + term.observable)[0])


def execute_downstream(fragment: Fragment, term: CutTerm,
                       downstream_request: Union[None, str, PauliObservable] = None) -> Union[float, np.ndarray]:
    """
    Prepare the fresh wire in psi_m, run the fragment, and return either the
    requested Pauli expectation or (request None) the 2^k probability vector.
    """
    states = _downstream_states(fragment, term.eigenstate, None)
    if downstream_request is None:
        return probabilities_batch(states)[0]
    obs = _as_observable(downstream_request)
    if obs.n_qubits != fragment.circuit.n_qubits:
        raise DimensionError(f"downstream request covers {obs.n_qubits} qubit(s), fragment has {fragment.circuit.n_qubits}")
    return float(expectation_batch(states, obs.factors)[0])


# ============================================================================
# RECONSTRUCTION
# ============================================================================

def term_contributions(plan: ReconstructionPlan, observable: Union[str, PauliObservable],
                       max_workers: Optional[int] = None) -> np.ndarray:
    """c_m · <P_up ⊗ O_m>_up · <P_down>_{psi_m} for m = 1..8, in index order."""
    obs = _as_observable(observable)
    pair = plan.pair
    if obs.n_qubits != pair.n_qubits:
        raise DimensionError(f"observable covers {obs.n_qubits} qubit(s), circuit has {pair.n_qubits}")
    p_up, p_down = obs.factors[:pair.wire], obs.factors[pair.wire:]

    states = upstream_states(pair.upstream)
    up_values = {o: float(expectation_batch(states, p_up + o)[0]) for o in ("I", "X", "Y", "Z")}
    labels = sorted({term.eigenstate for term in plan.terms}, key=PREPARATIONS.index)
    down = _pool_map(
        lambda label: float(expectation_batch(_downstream_states(pair.downstream, label, None), p_down)[0]),
        labels,
        max_workers,
    )
    down_values = dict(zip(labels, down))
    return np.array([
        term.coefficient * up_values[term.observable] * down_values[term.eigenstate]
        for term in plan.terms
    ])


def reconstruct_expectation(plan: ReconstructionPlan, observable: Union[str, PauliObservable, None] = None,
                            max_workers: Optional[int] = None) -> float:
    """Uncut <P_up ⊗ P_down> recombined from the fragments."""
    observable = observable if observable is not None else plan.observable
    if observable is None:
        raise DimensionError("no observable requested")
    total = 0.0
    for value in term_contributions(plan, observable, max_workers):
        total += value
    return total


def reconstruct_probabilities_batch(
    plan: ReconstructionPlan,
    up_angles: np.ndarray,
    down_angles: np.ndarray,
    max_workers: Optional[int] = None,
) -> np.ndarray:
    """
    Reconstructed 2^n distributions for B angle rows.
    Entry (b_up, b_down) = sum_m c_m <Pi_b_up ⊗ O_m>_up · P_down(b_down | psi_m).
    """
    pair = plan.pair
    up_states = upstream_states(pair.upstream, up_angles)
    settings = _pool_map(
        lambda basis: upstream_setting_probabilities(pair.upstream, basis, states=up_states),
        MEASUREMENT_BASES,
        max_workers,
    )
    by_basis = dict(zip(MEASUREMENT_BASES, settings))
    up_values = {"I": by_basis["Z"][..., 0] + by_basis["Z"][..., 1]}
    for basis in MEASUREMENT_BASES:
        up_values[basis] = by_basis[basis][..., 0] - by_basis[basis][..., 1]

    distributions = _pool_map(
        lambda label: downstream_preparation_probabilities(pair.downstream, label, down_angles),
        PREPARATIONS,
        max_workers,
    )
    down_values = dict(zip(PREPARATIONS, distributions))

    rows = up_values["I"].shape[0]
    total = np.zeros((rows, up_values["I"].shape[1], down_values[PREPARATIONS[0]].shape[1]))
    for term in plan.terms:
        total += term.coefficient * up_values[term.observable][:, :, None] * down_values[term.eigenstate][:, None, :]
    return total.reshape(rows, -1)


def reconstruct_probabilities(plan: ReconstructionPlan, max_workers: Optional[int] = None) -> np.ndarray:
    """Full 2^n output distribution of a bound circuit, rebuilt from its fragments."""
    up = _literal_angles(plan.pair.upstream)
    down = _literal_angles(plan.pair.downstream)
    return reconstruct_probabilities_batch(plan, up, down, max_workers)[0]


def normalize_distribution(probs: np.ndarray) -> np.ndarray:
    """Clamp floating-point negatives to 0 and renormalize along the last axis."""
    clipped = np.clip(probs, 0.0, None)
    return clipped / clipped.sum(axis=-1, keepdims=True)
