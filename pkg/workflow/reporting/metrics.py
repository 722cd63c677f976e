#!/usr/bin/env python3

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from workflow.errors import MetricError

logger = logging.getLogger('gaitlab.reporting.metrics')

# angle_lo, angle_hi, timestep, overlap, dimensionality
ResultKey = Tuple[float, float, int, int, str]

MISSING = "n/a"


@dataclass(frozen=True)
class FoldResult:
    """Outcome of one trained grid cell; ``auroc`` is None when the test fold is single-class"""
    angle_lo: float
    angle_hi: float
    timestep: int
    overlap: int
    dimensionality: str
    fold: int
    auroc: Optional[float]
    epochs_run: int
    best_epoch: int
    training_log: Optional[Any] = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> ResultKey:
        return (self.angle_lo, self.angle_hi, self.timestep, self.overlap, self.dimensionality)

    @property
    def sort_key(self):
        return self.key + (self.fold,)

    @property
    def file_stem(self) -> str:
        return (f"group_{self.angle_lo:g}-{self.angle_hi:g}_T{self.timestep}_"
                f"{self.dimensionality}_fold{self.fold}")


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUROC with ties credited one half.

    Raises MetricError unless both classes are present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError(f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors")
    if not np.all((labels == 0) | (labels == 1)):
        raise MetricError("labels must be 0 or 1")
    if not np.all(np.isfinite(scores)):
        raise MetricError("scores must be finite")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUROC needs at least one positive and one negative label")

    # average ranks, 1-based, ties share the mean of their positions
    order = np.argsort(scores, kind='mergesort')
    sorted_scores = scores[order]
    starts = np.flatnonzero(np.r_[True, sorted_scores[1:] != sorted_scores[:-1]])
    ends = np.r_[starts[1:], len(scores)]
    ranks = np.empty(len(scores), dtype=np.float64)
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)

    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class ExperimentResult:
    """Fold AUROCs of one grid cell; ``None`` marks a fold without a defined AUROC"""
    angle_lo: float
    angle_hi: float
    timestep: int
    overlap: int
    dimensionality: str
    fold_values: Tuple[Optional[float], ...]
    mean: Optional[float]
    std: Optional[float]

    @property
    def key(self) -> ResultKey:
        return (self.angle_lo, self.angle_hi, self.timestep, self.overlap, self.dimensionality)

    @property
    def width(self) -> float:
        return self.angle_hi - self.angle_lo

    @property
    def formatted(self) -> str:
        return format_mean_std(self.mean, self.std)


def mean_std(values: Iterable[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    """Mean and population std of the defined values; order does not matter"""
    present = sorted(float(v) for v in values if v is not None)
    if not present:
        return None, None
    mean = math.fsum(present) / len(present)
    variance = math.fsum((v - mean) ** 2 for v in present) / len(present)
    return mean, math.sqrt(variance)


def aggregate(key: ResultKey, fold_values: Sequence[Optional[float]]) -> ExperimentResult:
    if not fold_values:
        raise MetricError(f"no fold values for {key}")
    mean, std = mean_std(fold_values)
    lo, hi, timestep, overlap, dimensionality = key
    return ExperimentResult(
        angle_lo=float(lo), angle_hi=float(hi), timestep=int(timestep), overlap=int(overlap),
        dimensionality=dimensionality, fold_values=tuple(fold_values), mean=mean, std=std,
    )


def aggregate_folds(fold_results: Iterable) -> List[ExperimentResult]:
    """Group fold results by grid cell; fold values are ordered by fold index"""
    cells = {}
    for result in fold_results:
        cells.setdefault(result.key, []).append(result)
    aggregated = []
    for key in sorted(cells):
        folds = sorted(cells[key], key=lambda r: r.fold)
        aggregated.append(aggregate(key, [r.auroc for r in folds]))
    return aggregated


def format_number(value: Optional[float]) -> str:
    """Three decimals with trailing zeros trimmed, keeping one decimal"""
    if value is None:
        return MISSING
    text = f"{value:.3f}".rstrip('0')
    return text + '0' if text.endswith('.') else text


def format_mean_std(mean: Optional[float], std: Optional[float]) -> str:
    if mean is None:
        return MISSING
    return f"{format_number(mean)} ± {format_number(std)}"
