"""
Fragment Service: FastAPI Executor
==================================

Exposes fragment execution over REST so the two halves of a cut circuit can
run on separate executors. Documents are the JSON fragment documents written
by `quantum.serialization`; they may be sent as a JSON object or as a string.

HOW TO RUN:
===========
uvicorn api:app --reload
"""

import json
import logging
from datetime import datetime
from typing import Any, Dict, List, Literal, Union

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, ValidationError

import settings
from models.errors import QCNNError
from models.schemas import Fragment
from quantum.cutting import (
    ReconstructionPlan,
    cut_terms,
    downstream_preparation_probabilities,
    normalize_distribution,
    pair_fragments,
    qubit_requirements,
    reconstruct_probabilities,
    upstream_setting_probabilities,
)
from quantum.serialization import deserialize_fragment
from quantum.statevector import parse_eigenstate

logger = logging.getLogger(__name__)

SERVICE_NAME = "QCNN Fragment Service"
VERSION = "1.0.0"

# ============================================================================
# CONFIGURATION
# ============================================================================

app = FastAPI(
    title=SERVICE_NAME,
    description="Executes upstream/downstream fragments of a wire-cut circuit and recombines them",
    version=VERSION,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(QCNNError)
async def qcnn_error_handler(request: Request, exc: QCNNError):
    logger.warning("%s %s rejected: %s", request.method, request.url.path, exc)
    return JSONResponse(status_code=422, content={"detail": str(exc), "error": type(exc).__name__})


@app.exception_handler(ValidationError)
async def validation_error_handler(request: Request, exc: ValidationError):
    detail = [{"loc": list(e["loc"]), "msg": e["msg"], "type": e["type"]} for e in exc.errors()]
    return JSONResponse(status_code=422, content={"detail": detail, "error": "ValidationError"})


# ============================================================================
# MODELS
# ============================================================================

Document = Union[str, Dict[str, Any]]


class UpstreamRequest(BaseModel):
    """Run an upstream fragment with its cut wire read in one basis."""
    document: Document = Field(..., description="Upstream fragment document")
    basis: Literal["X", "Y", "Z"] = Field(..., description="Measurement basis of the cut wire")


class DownstreamRequest(BaseModel):
    """Run a downstream fragment with its fresh wire prepared in an eigenstate."""
    document: Document = Field(..., description="Downstream fragment document")
    preparation: str = Field(..., description="One of 0, 1, +, -, +i, -i")

    class Config:
        json_schema_extra = {"example": {"document": "{...}", "preparation": "+i"}}


class ReconstructRequest(BaseModel):
    upstream: Document
    downstream: Document


def _fragment(document: Document) -> Fragment:
    text = document if isinstance(document, str) else json.dumps(document)
    return deserialize_fragment(text)


def _vector(values) -> List[float]:
    return [float(v) for v in values]


# ============================================================================
# ENDPOINTS
# ============================================================================

@app.get("/")
async def root():
    return {
        "service": SERVICE_NAME,
        "version": VERSION,
        "status": "online",
        "endpoints": {
            "cut_terms": "GET /cut-terms",
            "upstream": "POST /fragments/upstream",
            "downstream": "POST /fragments/downstream",
            "reconstruct": "POST /reconstruct",
        },
    }


@app.get("/health")
async def health():
    return {"status": "healthy", "timestamp": datetime.now().isoformat()}


@app.get("/cut-terms")
async def get_cut_terms():
    """The 8 (observable, eigenstate, coefficient) terms in index order."""
    return {"terms": [term.model_dump(mode="json") for term in cut_terms()]}


@app.post("/fragments/upstream")
def run_upstream(payload: UpstreamRequest):
    """
    Outcome distribution over (upstream qubits, cut wire), flattened with the
    cut wire as the least significant bit.
    """
    fragment = _fragment(payload.document)
    probs = upstream_setting_probabilities(fragment, payload.basis)[0].ravel()
    return {"role": fragment.role.value, "basis": payload.basis, "n_qubits": fragment.circuit.n_qubits,
            "probabilities": _vector(probs)}


@app.post("/fragments/downstream")
def run_downstream(payload: DownstreamRequest):
    fragment = _fragment(payload.document)
    label = parse_eigenstate(payload.preparation)
    probs = downstream_preparation_probabilities(fragment, label)[0]
    return {"role": fragment.role.value, "preparation": label.value, "n_qubits": fragment.circuit.n_qubits,
            "probabilities": _vector(probs)}


@app.post("/reconstruct")
def reconstruct(payload: ReconstructRequest):
    """Recombine both fragments into the uncut circuit's output distribution."""
    pair = pair_fragments(_fragment(payload.upstream), _fragment(payload.downstream))
    plan = ReconstructionPlan(pair=pair, terms=cut_terms())
    raw = reconstruct_probabilities(plan, settings.max_workers())
    return {
        "n_qubits": pair.n_qubits,
        "cut": {"wire": pair.wire, "position": pair.upstream.cut.position},
        "qubit_requirements": qubit_requirements(pair),
        "raw": _vector(raw),
        "probabilities": _vector(normalize_distribution(raw)),
    }


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
