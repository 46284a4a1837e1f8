"""
Result schemas: confusion matrices, evaluation and ablation reports,
training log rows, verification reports and checkpoints.
"""

from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from .config import ModelConfig


class ConfusionMatrix(BaseModel):
    """counts[i][j] = samples of true class i predicted as j."""
    n_classes: int = Field(..., ge=1)
    counts: List[List[int]]

    @model_validator(mode="after")
    def _check(self) -> "ConfusionMatrix":
        if len(self.counts) != self.n_classes or any(len(row) != self.n_classes for row in self.counts):
            raise ValueError(f"confusion matrix must be {self.n_classes}x{self.n_classes}")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("confusion counts must be nonnegative")
        return self

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(self.n_classes))


class ClassMetrics(BaseModel):
    """One-vs-rest metrics of a single class. Undefined cells are 0 and listed in `undefined`."""
    label: int
    name: str
    support: int
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    specificity: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    auc: float = Field(..., ge=0, le=1)
    undefined: List[str] = Field(default_factory=list)


class EvalReport(BaseModel):
    accuracy: float = Field(..., ge=0, le=1)
    macro_auc: float = Field(..., ge=0, le=1)
    auc_undefined: bool = False
    n_samples: int
    per_class: List[ClassMetrics]
    confusion: ConfusionMatrix
    loss: Optional[float] = None
    n_parameters: Optional[int] = Field(default=None, ge=0)
    n_quantum_parameters: Optional[int] = Field(default=None, ge=0)

    def macro(self, metric: str) -> float:
        values = [getattr(c, metric) for c in self.per_class]
        return sum(values) / len(values)


class TrainingLogRow(BaseModel):
    epoch: int = Field(..., ge=1)
    split: str
    loss: float
    accuracy: float = Field(..., ge=0, le=1)


class OptimizerSnapshot(BaseModel):
    """Adadelta accumulators over the flattened (theta, W, b) vector."""
    rho: float
    eps: float
    lr: float
    steps: int = 0
    square_avg: List[float]
    acc_delta: List[float]


class Checkpoint(BaseModel):
    model: ModelConfig
    theta: List[float]
    head_weights: List[List[float]]
    head_bias: List[float]
    optimizer: OptimizerSnapshot
    seed: int
    config_hash: str
    epochs_trained: int = 0
    class_names: List[str] = Field(default_factory=list)
    created_at: datetime = Field(default_factory=datetime.now)


class VerifyReport(BaseModel):
    circuit: str
    n_qubits: int
    trials: int
    seed: int
    tolerance: float
    max_deviation: float
    passed: bool
    qubit_requirements: Dict[str, int]


class AblationRow(BaseModel):
    """One line of the cut-vs-uncut comparison table."""
    dataset: str
    cut: bool
    accuracy: float
    precision: float
    recall: float
    specificity: float
    f1: float
    auc: float
    final_loss: Optional[float] = None
    n_parameters: Optional[int] = None


class AblationReport(BaseModel):
    rows: List[AblationRow]
    deltas: Dict[str, float] = Field(..., description="|cut - uncut| per metric")
    max_delta: float
