"""Models package for the distributed QCNN toolkit."""
from .errors import (
    QCNNError,
    CircuitError,
    CircuitFormatError,
    CutError,
    DimensionError,
    DataError,
    ConfigError,
)
from .schemas import (
    GateKind,
    SlotRole,
    GateOp,
    Slot,
    Circuit,
    KernelGate,
    KernelSpec,
    FeatureScaling,
    EncodingSpec,
    PauliObservable,
    EigenstateLabel,
    CutSpec,
    CutTerm,
    FragmentRole,
    Fragment,
    FragmentPair,
)
from .config import (
    DatasetSource,
    HeadInput,
    AugmentationConfig,
    DatasetManifest,
    DatasetConfig,
    ModelConfig,
    TrainingConfig,
    RunConfig,
    VerifyConfig,
)
from .reports import (
    ConfusionMatrix,
    ClassMetrics,
    EvalReport,
    TrainingLogRow,
    OptimizerSnapshot,
    Checkpoint,
    VerifyReport,
    AblationRow,
    AblationReport,
)

__all__ = [
    "QCNNError",
    "CircuitError",
    "CircuitFormatError",
    "CutError",
    "DimensionError",
    "DataError",
    "ConfigError",
    "GateKind",
    "SlotRole",
    "GateOp",
    "Slot",
    "Circuit",
    "KernelGate",
    "KernelSpec",
    "FeatureScaling",
    "EncodingSpec",
    "PauliObservable",
    "EigenstateLabel",
    "CutSpec",
    "CutTerm",
    "FragmentRole",
    "Fragment",
    "FragmentPair",
    "DatasetSource",
    "HeadInput",
    "AugmentationConfig",
    "DatasetManifest",
    "DatasetConfig",
    "ModelConfig",
    "TrainingConfig",
    "RunConfig",
    "VerifyConfig",
    "ConfusionMatrix",
    "ClassMetrics",
    "EvalReport",
    "TrainingLogRow",
    "OptimizerSnapshot",
    "Checkpoint",
    "VerifyReport",
    "AblationRow",
    "AblationReport",
]
