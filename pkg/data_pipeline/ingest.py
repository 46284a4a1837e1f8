"""
Dataset ingestion: per-class image directories (PNG/PGM) or a feature CSV.
Ordering is deterministic: class order from the manifest, then filename order
within a class; CSV rows keep file order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from models.config import DatasetManifest
from models.errors import DataError
from data_pipeline.samples import Sample, class_counts

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".pgm"}


def load_image(path: Path) -> np.ndarray:
    """Grayscale intensities in [0, 1]; color images are converted by luminance."""
    try:
        with Image.open(path) as img:
            gray = img.convert("L")
            return np.asarray(gray, dtype=np.float64) / 255.0
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc


def ingest_csv(path: Path, manifest: DatasetManifest) -> List[Sample]:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read feature CSV {path}: {exc}") from exc
    if manifest.label_column not in frame.columns:
        raise DataError(f"{path} has no '{manifest.label_column}' column")
    feature_columns = [c for c in frame.columns if c != manifest.label_column]
    if not feature_columns:
        raise DataError(f"{path} has no feature columns")

    raw_labels = frame[manifest.label_column]
    names = {name: i for i, name in enumerate(manifest.class_names)}
    if pd.api.types.is_integer_dtype(raw_labels):
        labels = raw_labels.to_numpy(dtype=np.intp)
    else:
        unknown = sorted(set(raw_labels.astype(str)) - set(names))
        if unknown:
            raise DataError(f"{path}: labels {unknown} are not manifest classes")
        labels = raw_labels.astype(str).map(names).to_numpy(dtype=np.intp)
    if labels.size and (labels.min() < 0 or labels.max() >= len(manifest.class_names)):
        raise DataError(f"{path}: label ids must lie in [0, {len(manifest.class_names)})")

    values = frame[feature_columns].to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: non-finite feature values")
    return [
        Sample(label=int(label), features=row, source=f"{path.name}:{i}")
        for i, (row, label) in enumerate(zip(values, labels))
    ]


def ingest_images(root: Path, manifest: DatasetManifest, max_workers: int = 1) -> List[Sample]:
    files = []
    for label, name in enumerate(manifest.class_names):
        class_dir = root / name
        if not class_dir.is_dir():
            raise DataError(f"missing class directory {class_dir}")
        paths = sorted(p for p in class_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        if not paths:
            raise DataError(f"class directory {class_dir} holds no PNG/PGM images")
        files.extend((label, p) for p in paths)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        images = list(pool.map(lambda item: load_image(item[1]), files))
    return [
        Sample(label=label, image=image, source=f"{path.parent.name}/{path.name}")
        for (label, path), image in zip(files, images)
    ]


def ingest(path: Path, manifest: DatasetManifest, max_workers: int = 1) -> List[Sample]:
    """Load a CSV file or an image directory tree and check it against the manifest."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset path {path} does not exist")
    if path.is_dir():
        samples = ingest_images(path, manifest, max_workers)
    else:
        samples = ingest_csv(path, manifest)
    if not samples:
        raise DataError(f"dataset {path} is empty")

    counts = class_counts(samples)
    for name, expected in manifest.counts.items():
        found = counts.get(manifest.class_names.index(name), 0)
        if found != expected:
            raise DataError(f"class '{name}': manifest expects {expected} sample(s), found {found}")
    logger.info("ingested %d sample(s) from %s: %s", len(samples), path,
                {manifest.class_names[k]: v for k, v in counts.items()})
    return samples
