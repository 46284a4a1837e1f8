"""
Experiment Brain (Core Logic)
=============================

The experiment pipeline as a LANGGRAPH state graph, shared by the CLI:

    load -> split -> train                      (mode "train")
    load -> split -> restore -> evaluate        (mode "eval")
    load -> split -> ablate                     (mode "ablate")

Every stage appends structured LogEntry rows to the append-only `logs`
channel. A failing node records its exception in `error`, logs it, and the
graph stops; ExperimentRunner re-raises it to the caller.

Cut verification does not need a dataset and runs outside the graph
(`verify_cut`).
"""

from dataclasses import dataclass, field
from datetime import datetime
import logging
from typing import Annotated, Callable, Dict, List, Optional, Sequence, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph

import settings
from data_pipeline import (
    Sample,
    augment,
    class_counts,
    ingest,
    reduce_samples,
    split,
    synthetic_clusters,
    to_arrays,
)
from data_pipeline.splits import split_names
from evaluation.metrics import ablation_row, build_confusion, compare_runs, compute_metrics
from hybrid.model import HybridModel, init_model, toggle_cut
from hybrid.optimizer import OptimizerState
from hybrid.trainer import evaluate, from_checkpoint, to_checkpoint, train
from models.config import DatasetSource, RunConfig, VerifyConfig
from models.errors import DataError, DimensionError
from models.reports import AblationReport, Checkpoint, EvalReport, TrainingLogRow, VerifyReport
from models.schemas import Circuit, CutSpec, CutTerm, EncodingSpec, GateKind, GateOp, SlotRole
from artifacts import read_checkpoint
from quantum.circuit import bind, build_qcnn_circuit, free_slot_ids, run
from quantum.cutting import default_cut, plan_for, qubit_requirements, reconstruct_probabilities
from quantum.statevector import probabilities

logger = logging.getLogger(__name__)


# ============================================================================
# LOGGING STRUCTURES
# ============================================================================

@dataclass
class LogEntry:
    """A single log entry."""
    log_type: str
    agent: str
    message: str
    timestamp: str = field(default_factory=lambda: datetime.now().strftime("%H:%M:%S.%f")[:-3])

    def to_dict(self) -> dict:
        return {
            "type": self.log_type,
            "agent": self.agent,
            "message": self.message,
            "timestamp": self.timestamp
        }


# ============================================================================
# LANGGRAPH STATE
# ============================================================================

def merge_logs(left: List[dict], right: List[dict]) -> List[dict]:
    """Reducer to append logs."""
    if right is None:
        return left
    return left + right


class ExperimentState(TypedDict, total=False):
    # Inputs
    mode: str
    config: RunConfig
    checkpoint_path: Optional[str]
    eval_split: Optional[str]
    cut_override: Optional[bool]
    progress: Optional[Callable[[Sequence[TrainingLogRow]], None]]

    # Data
    samples: List[Sample]
    class_names: List[str]
    split_ratios: List[float]
    split_seed: int
    splits: Dict[str, List[Sample]]

    # Results
    model: Optional[HybridModel]
    optimizer: Optional[OptimizerState]
    checkpoint: Optional[Checkpoint]
    train_log: List[TrainingLogRow]
    eval_report: Optional[EvalReport]
    ablation: Optional[AblationReport]
    ablation_logs: Dict[str, List[TrainingLogRow]]
    error: Optional[BaseException]

    # Shared Logs (Append-only)
    logs: Annotated[List[dict], merge_logs]


def _failed(agent: str, exc: BaseException) -> dict:
    logger.error("%s failed: %s", agent, exc)
    return {"error": exc, "logs": [LogEntry("ERROR", agent, f"{type(exc).__name__}: {exc}").to_dict()]}


# ============================================================================
# STAGE NODES
# ============================================================================

def load_samples(config: RunConfig):
    ds = config.dataset
    n_qubits = config.model.n_qubits
    if ds.source == DatasetSource.SYNTHETIC:
        samples = synthetic_clusters(ds.n_samples, n_qubits, ds.n_classes, config.training.seed, ds.spread)
        return samples, [f"class{c}" for c in range(ds.n_classes)], ds.split_ratios, config.training.seed

    manifest = settings.load_manifest(ds.manifest)
    samples = ingest(ds.path, manifest, settings.max_workers())
    if ds.source == DatasetSource.IMAGES:
        if manifest.augmentation.enabled:
            samples = augment(samples, manifest.augmentation.target_per_class, manifest.seed,
                              manifest.augmentation.allow_subsample)
        samples = reduce_samples(samples, n_qubits)
    return samples, list(manifest.class_names), manifest.split_ratios, manifest.seed


def load_node(state: ExperimentState):
    """Ingest, augment and reduce the configured dataset."""
    config = state["config"]
    try:
        samples, class_names, ratios, seed = load_samples(config)
        if len(class_names) != config.model.n_classes and state["mode"] != "eval":
            raise DataError(f"dataset has {len(class_names)} classes, model expects {config.model.n_classes}")
        width = samples[0].features.shape[0]
        if state["mode"] != "eval" and width != config.model.n_qubits:
            raise DimensionError(f"samples have {width} features, model has {config.model.n_qubits} qubits")
    except Exception as exc:
        return _failed("Loader", exc)

    counts = {class_names[k]: v for k, v in class_counts(samples).items()}
    return {
        "samples": samples,
        "class_names": class_names,
        "split_ratios": list(ratios),
        "split_seed": seed,
        "logs": [
            LogEntry("STAGE", "Loader", f"Loaded {len(samples)} samples from {config.dataset.name}").to_dict(),
            LogEntry("SYSTEM", "Loader", f"Class counts: {counts}").to_dict(),
        ],
    }


def split_node(state: ExperimentState):
    """Stratified seeded split."""
    ratios = state["split_ratios"]
    try:
        parts = split(state["samples"], ratios, state["split_seed"])
    except Exception as exc:
        return _failed("Splitter", exc)
    splits = dict(zip(split_names(len(ratios)), parts))
    return {
        "splits": splits,
        "logs": [LogEntry("STAGE", "Splitter",
                          "Split sizes: " + ", ".join(f"{n}={len(p)}" for n, p in splits.items())).to_dict()],
    }


def _validation(splits: Dict[str, List[Sample]]):
    for name in ("val", "test"):
        if splits.get(name):
            x, y = to_arrays(splits[name])
            return name, x, y
    return None


def _train_one(config: RunConfig, splits, progress=None):
    x, y = to_arrays(splits["train"])
    model = init_model(config.model, config.training.seed, settings.max_workers())
    return train(model, x, y, config.training.epochs, config.training.seed, config.training,
                 validation=_validation(splits), on_epoch=progress)


def train_node(state: ExperimentState):
    """Initialize from the run seed and train on the train split."""
    config = state["config"]
    try:
        result = _train_one(config, state["splits"], state.get("progress"))
        checkpoint = to_checkpoint(result.model, result.optimizer, config.training.seed, config.config_hash(),
                                   config.training.epochs, state["class_names"])
    except Exception as exc:
        return _failed("Trainer", exc)

    logs = [LogEntry("STAGE", "Trainer",
                     f"Trained {config.training.epochs} epoch(s), cut={'on' if result.model.cut_enabled else 'off'}").to_dict()]
    if result.log:
        last = [r for r in result.log if r.split == "train"][-1]
        logs.append(LogEntry("METRIC", "Trainer", f"Final train loss {last.loss:.4f}, accuracy {last.accuracy:.4f}").to_dict())
    return {
        "model": result.model,
        "optimizer": result.optimizer,
        "checkpoint": checkpoint,
        "train_log": result.log,
        "logs": logs,
    }


def restore_node(state: ExperimentState):
    """Rebuild the model from a checkpoint and check it fits the dataset."""
    try:
        checkpoint = read_checkpoint(state["checkpoint_path"])
        model, optimizer = from_checkpoint(checkpoint, settings.max_workers())
        if state.get("cut_override") is not None and state["cut_override"] != model.cut_enabled:
            model = toggle_cut(model, state["cut_override"])
        width = state["samples"][0].features.shape[0]
        if width != model.n_qubits:
            raise DimensionError(f"dataset has {width} features, checkpoint model has {model.n_qubits} qubits")
        if len(state["class_names"]) != model.config.n_classes:
            raise DimensionError(f"dataset has {len(state['class_names'])} classes, "
                                 f"checkpoint model has {model.config.n_classes}")
    except Exception as exc:
        return _failed("Restore", exc)
    return {
        "model": model,
        "optimizer": optimizer,
        "checkpoint": checkpoint,
        "logs": [LogEntry("STAGE", "Restore",
                          f"Loaded checkpoint ({checkpoint.epochs_trained} epoch(s), seed {checkpoint.seed})").to_dict()],
    }


def _eval_samples(state: ExperimentState) -> List[Sample]:
    name = state.get("eval_split")
    splits = state["splits"]
    if name == "all":
        return list(state["samples"])
    if name is None:
        name = "test" if splits.get("test") else "train"
    if name not in splits:
        raise DataError(f"no '{name}' split; available: {sorted(splits)}")
    return splits[name]


def _report(model: HybridModel, samples: List[Sample], class_names: List[str]) -> EvalReport:
    x, y = to_arrays(samples)
    result = evaluate(model, x, y)
    cm = build_confusion(y, result.predictions, model.config.n_classes)
    return compute_metrics(cm, result.scores, y, class_names, loss=result.loss,
                           n_parameters=model.n_parameters, n_quantum_parameters=int(model.theta.size))


def evaluate_node(state: ExperimentState):
    try:
        report = _report(state["model"], _eval_samples(state), state["class_names"])
    except Exception as exc:
        return _failed("Evaluator", exc)
    return {
        "eval_report": report,
        "logs": [LogEntry("METRIC", "Evaluator",
                          f"Accuracy {report.accuracy:.4f}, macro AUC {report.macro_auc:.4f} "
                          f"over {report.n_samples} samples").to_dict()],
    }


def ablate_node(state: ExperimentState):
    """Train cut and uncut models from the same seed and compare their metrics."""
    config = state["config"]
    rows = {}
    logs = {}
    try:
        eval_samples = _eval_samples(state)
        for cut in (True, False):
            variant = config.model_copy(update={"model": config.model.model_copy(update={"cut_enabled": cut})})
            result = _train_one(variant, state["splits"], state.get("progress"))
            report = _report(result.model, eval_samples, state["class_names"])
            train_rows = [r for r in result.log if r.split == "train"]
            final_loss = train_rows[-1].loss if train_rows else None
            rows[cut] = ablation_row(config.dataset.name, cut, report, final_loss)
            logs["cut" if cut else "uncut"] = result.log
        ablation = compare_runs(rows[True], rows[False])
    except Exception as exc:
        return _failed("Ablation", exc)
    return {
        "ablation": ablation,
        "ablation_logs": logs,
        "logs": [LogEntry("METRIC", "Ablation", f"Max |cut - uncut| metric delta {ablation.max_delta:.2e}").to_dict()],
    }


# ============================================================================
# ROUTING
# ============================================================================

def _after_split(state: ExperimentState) -> str:
    if state.get("error") is not None:
        return "stop"
    return {"train": "train", "eval": "restore", "ablate": "ablate"}[state["mode"]]


def _continue(state: ExperimentState) -> str:
    return "stop" if state.get("error") is not None else "next"


def build_graph():
    workflow = StateGraph(ExperimentState)

    workflow.add_node("load", load_node)
    workflow.add_node("split", split_node)
    workflow.add_node("train", train_node)
    workflow.add_node("restore", restore_node)
    workflow.add_node("evaluate", evaluate_node)
    workflow.add_node("ablate", ablate_node)

    workflow.set_entry_point("load")
    workflow.add_conditional_edges("load", _continue, {"next": "split", "stop": END})
    workflow.add_conditional_edges("split", _after_split,
                                   {"train": "train", "restore": "restore", "ablate": "ablate", "stop": END})
    workflow.add_edge("train", END)
    workflow.add_conditional_edges("restore", _continue, {"next": "evaluate", "stop": END})
    workflow.add_edge("evaluate", END)
    workflow.add_edge("ablate", END)
    return workflow.compile()


# ============================================================================
# EXPERIMENT RUNNER
# ============================================================================

class ExperimentRunner:
    """Wrapper to run the experiment graph."""

    @classmethod
    def _run(cls, inputs: dict) -> dict:
        config: RunConfig = inputs["config"]
        inputs["logs"] = [
            LogEntry("SYSTEM", "Runner", f"Experiment '{config.name}' started in {inputs['mode']} mode").to_dict(),
            LogEntry("SYSTEM", "Runner",
                     f"Model: {config.model.n_qubits} qubits, {config.model.layers} layer(s), "
                     f"cut {'on' if config.model.cut_enabled else 'off'}").to_dict(),
        ]
        final_state = build_graph().invoke(inputs)
        if final_state.get("error") is not None:
            raise final_state["error"]
        return final_state

    @classmethod
    def train(cls, config: RunConfig, progress=None) -> dict:
        return cls._run({"mode": "train", "config": config, "progress": progress})

    @classmethod
    def evaluate(cls, config: RunConfig, checkpoint_path: str, split_name: Optional[str] = None,
                 cut: Optional[bool] = None) -> dict:
        return cls._run({"mode": "eval", "config": config, "checkpoint_path": checkpoint_path,
                         "eval_split": split_name, "cut_override": cut})

    @classmethod
    def ablate(cls, config: RunConfig, progress=None) -> dict:
        return cls._run({"mode": "ablate", "config": config, "progress": progress})


# ============================================================================
# CUT VERIFICATION
# ============================================================================

def bell_circuit() -> Circuit:
    return Circuit(n_qubits=2, gates=(
        GateOp(kind=GateKind.H, qubits=(0,)),
        GateOp(kind=GateKind.CNOT, qubits=(0, 1)),
    ))


def verify_cut(config: VerifyConfig, terms: Optional[Sequence[CutTerm]] = None) -> VerifyReport:
    """
    Compare cut-reconstructed and uncut output distributions over seeded
    random models and inputs. `terms` replaces the cut term table.
    """
    rng = np.random.default_rng(config.seed)
    if config.circuit == "bell":
        template, n_qubits = bell_circuit(), 2
        cut = CutSpec(wire=0, position=1) if config.cut_wire is None else CutSpec(wire=config.cut_wire,
                                                                                  position=config.cut_position)
    else:
        n_qubits = config.n_qubits
        template = build_qcnn_circuit(EncodingSpec(n_features=n_qubits), config.kernel, config.layers)
        cut = default_cut(template) if config.cut_wire is None else CutSpec(wire=config.cut_wire,
                                                                            position=config.cut_position)

    n_enc = len(free_slot_ids(template, SlotRole.ENCODING))
    n_tr = len(free_slot_ids(template, SlotRole.TRAINABLE))
    workers = settings.max_workers()
    worst = 0.0
    requirements = None
    for _ in range(config.trials):
        circuit = bind(template, rng.uniform(0.0, np.pi, n_enc), rng.uniform(-np.pi, np.pi, n_tr))
        plan = plan_for(circuit, cut, terms)
        requirements = requirements or qubit_requirements(plan.pair)
        deviation = np.max(np.abs(reconstruct_probabilities(plan, workers) - probabilities(run(circuit))))
        worst = max(worst, float(deviation))

    report = VerifyReport(
        circuit=config.circuit,
        n_qubits=n_qubits,
        trials=config.trials,
        seed=config.seed,
        tolerance=config.tolerance,
        max_deviation=worst,
        passed=worst < config.tolerance,
        qubit_requirements=requirements,
    )
    logger.info("verify-cut %s: max deviation %.3e over %d trial(s)", config.circuit, worst, config.trials)
    return report
