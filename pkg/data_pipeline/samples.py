"""Sample records and small dataset helpers."""

from collections import Counter
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from models.errors import DataError


@dataclass(frozen=True)
class Sample:
    """
    One labelled example. Image samples carry a grayscale grid in [0, 1] until
    reduced; feature samples carry the n-angle vector.
    """
    label: int
    features: Optional[np.ndarray] = None
    image: Optional[np.ndarray] = None
    split: str = ""
    source: str = ""
    augmented: bool = False

    def with_split(self, split: str) -> "Sample":
        return replace(self, split=split)


def class_counts(samples: Sequence[Sample]) -> Dict[int, int]:
    counts = Counter(s.label for s in samples)
    return {label: counts[label] for label in sorted(counts)}


def to_arrays(samples: Sequence[Sample]) -> Tuple[np.ndarray, np.ndarray]:
    """(N, n_features) features and (N,) labels."""
    if not samples:
        raise DataError("no samples")
    missing = [s.source for s in samples if s.features is None]
    if missing:
        raise DataError(f"{len(missing)} sample(s) have no features yet (first: {missing[0]!r}); reduce images first")
    features = np.stack([s.features for s in samples]).astype(np.float64)
    labels = np.array([s.label for s in samples], dtype=np.intp)
    return features, labels
