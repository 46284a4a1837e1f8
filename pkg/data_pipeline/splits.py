"""
Stratified, seeded train/test (or train/val/test) splitting.

Split sizes follow largest-remainder rounding of N * ratio over the whole
dataset; each class is then apportioned to the splits by its own fractional
remainders so per-class proportions stay as close as the integers allow.
"""

import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from models.errors import DataError
from data_pipeline.samples import Sample

SPLIT_NAMES = {
    1: ("train",),
    2: ("train", "test"),
    3: ("train", "val", "test"),
}


def split_names(count: int) -> Tuple[str, ...]:
    return SPLIT_NAMES.get(count, tuple(f"split{i}" for i in range(count)))


def largest_remainder(total: int, ratios: Sequence[float]) -> List[int]:
    exact = [total * r for r in ratios]
    counts = [math.floor(x) for x in exact]
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:total - sum(counts)]:
        counts[i] += 1
    return counts


def _class_quotas(class_sizes: Dict[int, int], ratios: Sequence[float]) -> Dict[int, List[int]]:
    n_splits = len(ratios)
    targets = largest_remainder(sum(class_sizes.values()), ratios)
    quotas = {c: [math.floor(n * r) for r in ratios] for c, n in class_sizes.items()}
    left = {c: class_sizes[c] - sum(q) for c, q in quotas.items()}
    room = [targets[s] - sum(q[s] for q in quotas.values()) for s in range(n_splits)]

    candidates = sorted(
        ((class_sizes[c] * ratios[s] - quotas[c][s], c, s) for c in class_sizes for s in range(n_splits)),
        key=lambda item: (-item[0], item[1], item[2]),
    )
    for _, c, s in candidates:
        if left[c] > 0 and room[s] > 0:
            quotas[c][s] += 1
            left[c] -= 1
            room[s] -= 1
    for c in sorted(class_sizes):
        for s in range(n_splits):
            take = min(left[c], max(room[s], 0))
            quotas[c][s] += take
            left[c] -= take
            room[s] -= take
        if left[c]:
            quotas[c][int(np.argmax(ratios))] += left[c]
    return quotas


def split(samples: Sequence[Sample], ratios: Sequence[float], seed: int = 0) -> List[List[Sample]]:
    """
    Partition `samples` into len(ratios) lists tagged train/test or
    train/val/test. Each list keeps the input order.
    """
    ratios = [float(r) for r in ratios]
    if not ratios or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios must be positive and sum to 1, got {ratios}")
    names = split_names(len(ratios))

    by_class: Dict[int, List[int]] = {}
    for index, sample in enumerate(samples):
        by_class.setdefault(sample.label, []).append(index)
    for label, members in by_class.items():
        if len(members) < len(ratios):
            raise DataError(f"class {label} has {len(members)} sample(s), fewer than {len(ratios)} splits")

    quotas = _class_quotas({c: len(m) for c, m in by_class.items()}, ratios)
    rng = np.random.default_rng(seed)
    assignment = {}
    for label in sorted(by_class):
        members = by_class[label]
        shuffled = [members[i] for i in rng.permutation(len(members))]
        start = 0
        for s, count in enumerate(quotas[label]):
            for index in shuffled[start:start + count]:
                assignment[index] = s
            start += count

    out: List[List[Sample]] = [[] for _ in ratios]
    for index, sample in enumerate(samples):
        s = assignment[index]
        out[s].append(sample.with_split(names[s]))
    return out
