"""Quantum package: statevector simulation, circuit IR and wire cutting."""

from .statevector import (
    StateVector,
    apply_gate,
    expectation,
    probabilities,
    prepare_eigenstate,
)
from .circuit import (
    bind,
    build_encoding_layer,
    build_mps_ansatz,
    build_qcnn_circuit,
    decompose_cry,
    run,
    scale_features,
)
from .serialization import serialize, deserialize
from .cutting import (
    ReconstructionPlan,
    cut_terms,
    default_cut,
    execute_downstream,
    execute_upstream,
    plan_for,
    reconstruct_expectation,
    reconstruct_probabilities,
    split,
)

__all__ = [
    "StateVector",
    "apply_gate",
    "expectation",
    "probabilities",
    "prepare_eigenstate",
    "bind",
    "build_encoding_layer",
    "build_mps_ansatz",
    "build_qcnn_circuit",
    "decompose_cry",
    "run",
    "scale_features",
    "serialize",
    "deserialize",
    "ReconstructionPlan",
    "cut_terms",
    "default_cut",
    "execute_downstream",
    "execute_upstream",
    "plan_for",
    "reconstruct_expectation",
    "reconstruct_probabilities",
    "split",
]
