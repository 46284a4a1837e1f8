"""Data pipeline: ingestion, band-mean reduction, augmentation and splitting."""

from .samples import Sample, class_counts, to_arrays
from .ingest import ingest
from .reducer import REDUCER_NAME, reduce, reduce_samples
from .augment import augment
from .splits import split
from .synthetic import synthetic_clusters, write_feature_csv

__all__ = [
    "Sample",
    "class_counts",
    "to_arrays",
    "ingest",
    "REDUCER_NAME",
    "reduce",
    "reduce_samples",
    "augment",
    "split",
    "synthetic_clusters",
    "write_feature_csv",
]
