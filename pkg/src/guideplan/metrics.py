"""Segmentation overlap scores and benchmark trial summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .guidance import GuidanceMap


@dataclass(frozen=True)
class BinaryMask:
    """Boolean raster; the positive class marks guided cells."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", arr)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")

    @property
    def shape(self):
        return self.mask.shape


def binarize(guidance: GuidanceMap, threshold: float = 0.5) -> BinaryMask:
    """Cells with weight strictly above the threshold."""
    return BinaryMask(guidance.weight > threshold)


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union; two empty masks count as a perfect 1.0."""
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a.mask & b.mask))
    union = int(np.count_nonzero(a.mask | b.mask))
    if union == 0:
        return 1.0
    return inter / union


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """Dice coefficient, computed from IoU so dice = 2*iou/(1+iou) exactly."""
    j = iou(a, b)
    return 2.0 * j / (1.0 + j)


@dataclass(frozen=True)
class StatBlock:
    """Location summary of one metric over successful trials."""

    median: float
    mean: float
    q1: float
    q3: float

    @classmethod
    def of(cls, values) -> "StatBlock":
        xs = np.asarray(values, dtype=np.float64)
        if xs.size == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan)
        q1, med, q3 = np.percentile(xs, [25.0, 50.0, 75.0])
        return cls(float(med), float(xs.mean()), float(q1), float(q3))


@dataclass(frozen=True)
class TrialSummary:
    """Aggregate view of a batch of planner records.

    Path-length and sampled-node statistics cover successful trials only;
    success_rate is over all trials. Statistics are NaN when nothing
    succeeded. Quartiles use linear interpolation between order statistics.
    """

    n_trials: int
    n_success: int
    success_rate: float
    path_length: StatBlock
    sampled_nodes: StatBlock


def summarize(records) -> TrialSummary:
    records = list(records)
    if not records:
        raise ValueError("cannot summarize zero trials")
    hits = [r for r in records if r.found]
    return TrialSummary(
        n_trials=len(records),
        n_success=len(hits),
        success_rate=len(hits) / len(records),
        path_length=StatBlock.of([r.path_length for r in hits]),
        sampled_nodes=StatBlock.of([r.sampled_nodes for r in hits]),
    )
