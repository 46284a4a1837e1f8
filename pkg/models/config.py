"""
Configuration schemas for experiment runs.
Config files are JSON documents validated against these models; unknown keys
are rejected so typos fail loudly instead of silently using defaults.
"""

import hashlib
from enum import Enum
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .schemas import FeatureScaling, KernelSpec


class DatasetSource(str, Enum):
    """Where samples come from."""
    SYNTHETIC = "synthetic"
    CSV = "csv"
    IMAGES = "images"


class HeadInput(str, Enum):
    """What the classical head reads from the quantum layer."""
    FULL = "full"            # all 2^n basis-state probabilities
    MARGINAL = "marginal"    # per-qubit P(1)


class AugmentationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = False
    target_per_class: Optional[int] = Field(None, ge=1, description="Defaults to the largest class count")
    allow_subsample: bool = False


class DatasetManifest(BaseModel):
    """
    Describes a dataset on disk: class names in label order, expected counts,
    split ratios, augmentation and the reducer that produced CSV features.
    """
    model_config = ConfigDict(extra="forbid")

    class_names: List[str] = Field(..., min_length=1)
    counts: Dict[str, int] = Field(default_factory=dict, description="Expected files/rows per class")
    split_ratios: List[float] = Field(default_factory=lambda: [0.8, 0.2])
    augmentation: AugmentationConfig = Field(default_factory=AugmentationConfig)
    seed: int = 0
    label_column: str = "label"
    reducer: str = Field("band-mean", description="Feature extractor that produced CSV rows")

    @model_validator(mode="after")
    def _check(self) -> "DatasetManifest":
        if len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class names must be unique")
        if not self.split_ratios or any(r <= 0 for r in self.split_ratios):
            raise ValueError("split ratios must be positive")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {sum(self.split_ratios)}")
        unknown = set(self.counts) - set(self.class_names)
        if unknown:
            raise ValueError(f"counts given for unknown classes {sorted(unknown)}")
        return self


class DatasetConfig(BaseModel):
    """Dataset section of a run config. File sources need `path` and `manifest`."""
    model_config = ConfigDict(extra="forbid")

    source: DatasetSource = DatasetSource.SYNTHETIC
    name: str = "synthetic"
    path: Optional[Path] = None
    manifest: Optional[Path] = None
    # synthetic source only
    n_samples: int = Field(200, ge=2)
    n_classes: int = Field(2, ge=2)
    spread: float = Field(0.15, ge=0.0)
    split_ratios: List[float] = Field(default_factory=lambda: [0.8, 0.2])

    @model_validator(mode="after")
    def _check(self) -> "DatasetConfig":
        if self.source != DatasetSource.SYNTHETIC and (self.path is None or self.manifest is None):
            raise ValueError(f"{self.source.value} datasets need both 'path' and 'manifest'")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9 or any(r <= 0 for r in self.split_ratios):
            raise ValueError("split ratios must be positive and sum to 1")
        return self


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_qubits: int = Field(8, ge=2, le=16)
    layers: int = Field(1, ge=1)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    n_classes: int = Field(2, ge=2)
    scaling: FeatureScaling = FeatureScaling.NONE
    head_input: HeadInput = HeadInput.FULL
    cut_enabled: bool = True
    cut_wire: Optional[int] = Field(None, ge=0)
    cut_position: Optional[int] = Field(None, ge=0)

    @model_validator(mode="after")
    def _check_cut(self) -> "ModelConfig":
        if (self.cut_wire is None) != (self.cut_position is None):
            raise ValueError("cut_wire and cut_position must be given together")
        if self.cut_wire is not None and self.cut_wire >= self.n_qubits:
            raise ValueError(f"cut_wire {self.cut_wire} outside 0..{self.n_qubits - 1}")
        return self


class TrainingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(50, ge=0)
    batch_size: int = Field(16, ge=1)
    lr: float = Field(0.05, gt=0)
    rho: float = Field(0.9, ge=0, lt=1)
    eps: float = Field(1e-6, gt=0)
    seed: int = 0


class RunConfig(BaseModel):
    """Everything `train`, `eval` and `ablate` need."""
    model_config = ConfigDict(extra="forbid")

    name: str = "qcnn"
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    output_dir: Path = Path("runs")

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form; stored in checkpoints."""
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()


class VerifyConfig(BaseModel):
    """Settings for the cut-exactness check."""
    model_config = ConfigDict(extra="forbid")

    circuit: Literal["ansatz", "bell"] = "ansatz"
    n_qubits: int = Field(8, ge=2, le=16)
    layers: int = Field(1, ge=1)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    trials: int = Field(100, ge=1)
    seed: int = 0
    tolerance: float = Field(1e-8, gt=0)
    cut_wire: Optional[int] = Field(None, ge=0)
    cut_position: Optional[int] = Field(None, ge=0)
    output_dir: Path = Path("runs")

    @model_validator(mode="after")
    def _check_cut(self) -> "VerifyConfig":
        if (self.cut_wire is None) != (self.cut_position is None):
            raise ValueError("cut_wire and cut_position must be given together")
        return self
