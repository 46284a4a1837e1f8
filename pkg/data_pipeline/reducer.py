"""
Band-mean reducer: the fixed image -> n angles feature extractor.

The image is resized (bilinear) to n x n, each of the n row bands is
averaged, and the means are mapped from [0, 1] to [0, pi].
"""

from dataclasses import replace
from typing import List, Sequence

import numpy as np
from PIL import Image

from models.errors import DataError, DimensionError
from data_pipeline.samples import Sample

REDUCER_NAME = "band-mean"


def reduce(image: np.ndarray, n_features: int = 8) -> np.ndarray:
    grid = np.asarray(image, dtype=np.float32)
    if grid.ndim != 2:
        raise DimensionError(f"expected a 2-D grayscale grid, got shape {grid.shape}")
    if grid.size == 0:
        raise DataError("degenerate image with zero area")
    resized = Image.fromarray(grid).resize((n_features, n_features), Image.Resampling.BILINEAR)
    bands = np.asarray(resized, dtype=np.float64).mean(axis=1)
    return np.clip(bands, 0.0, 1.0) * np.pi


def reduce_samples(samples: Sequence[Sample], n_features: int = 8) -> List[Sample]:
    """Samples that still carry an image get their feature vector filled in."""
    return [
        replace(s, features=reduce(s.image, n_features)) if s.features is None and s.image is not None else s
        for s in samples
    ]
