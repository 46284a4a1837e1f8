"""Seeded flip/rotation augmentation that pads minority classes to a common count."""

import logging
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from models.errors import DataError
from data_pipeline.samples import Sample

logger = logging.getLogger(__name__)

TRANSFORMS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "flip-h": np.fliplr,
    "flip-v": np.flipud,
    "rot90": lambda img: np.rot90(img, 1),
    "rot180": lambda img: np.rot90(img, 2),
    "rot270": lambda img: np.rot90(img, 3),
}


def augment(
    samples: Sequence[Sample],
    target_count_per_class: Optional[int] = None,
    seed: int = 0,
    allow_subsample: bool = False,
) -> List[Sample]:
    """
    Pad every class to `target_count_per_class` (default: the largest class)
    with transformed copies of its images. Originals keep their order and come
    first; padded samples follow, class by class.
    """
    if any(s.image is None for s in samples):
        raise DataError("augmentation needs image samples; feature rows cannot be transformed")
    groups: Dict[int, List[Sample]] = {}
    for sample in samples:
        groups.setdefault(sample.label, []).append(sample)
    if not groups:
        return []
    target = target_count_per_class or max(len(g) for g in groups.values())

    rng = np.random.default_rng(seed)
    names = list(TRANSFORMS)
    dropped = set()
    padded: List[Sample] = []
    for label in sorted(groups):
        group = groups[label]
        if len(group) > target:
            if not allow_subsample:
                raise DataError(f"class {label} has {len(group)} samples, above the target {target}")
            keep = set(rng.choice(len(group), size=target, replace=False).tolist())
            dropped.update(id(s) for i, s in enumerate(group) if i not in keep)
            continue
        for i in range(target - len(group)):
            base = group[int(rng.integers(len(group)))]
            name = names[int(rng.integers(len(names)))]
            padded.append(replace(
                base,
                image=np.ascontiguousarray(TRANSFORMS[name](base.image)),
                features=None,
                source=f"{base.source}#{name}-{i}",
                augmented=True,
            ))
        logger.debug("class %d: %d original, %d augmented", label, len(group), target - len(group))

    return [s for s in samples if id(s) not in dropped] + padded
