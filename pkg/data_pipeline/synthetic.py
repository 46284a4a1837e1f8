"""Synthetic angle-cluster datasets and the feature CSV writer."""

from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd

from artifacts import atomic_write_text
from data_pipeline.samples import Sample, to_arrays


def synthetic_clusters(
    n_samples: int = 200,
    n_features: int = 8,
    n_classes: int = 2,
    seed: int = 0,
    spread: float = 0.15,
) -> List[Sample]:
    """
    Every feature of a class-c sample is drawn uniformly around the class
    centre. Centres are evenly spaced in [0.2, 1.4] and values are clipped to
    [0, pi/2], where the encoded P(0) = (1 - sin x)/2 is monotone.
    """
    rng = np.random.default_rng(seed)
    centres = np.linspace(0.2, 1.4, n_classes)
    labels = np.arange(n_samples) % n_classes
    rng.shuffle(labels)
    noise = rng.uniform(-spread, spread, size=(n_samples, n_features))
    features = np.clip(centres[labels][:, None] + noise, 0.0, np.pi / 2)
    return [
        Sample(label=int(label), features=row, source=f"synthetic-{i}")
        for i, (row, label) in enumerate(zip(features, labels))
    ]


def feature_frame(samples: Sequence[Sample], label_column: str = "label") -> pd.DataFrame:
    """Columns f0..f{n-1} plus the label column."""
    features, labels = to_arrays(samples)
    frame = pd.DataFrame(features, columns=[f"f{i}" for i in range(features.shape[1])])
    frame[label_column] = labels
    return frame


def write_feature_csv(samples: Sequence[Sample], path: Path, label_column: str = "label") -> Path:
    return atomic_write_text(Path(path), feature_frame(samples, label_column).to_csv(index=False))
