#!/usr/bin/env python3
"""Video-level stratified folds and validation splits."""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np
from sklearn.model_selection import StratifiedKFold, train_test_split

from utils import round_half_up
from workflow.errors import ProtocolError

logger = logging.getLogger('gaitlab.dataset.splits')


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train_videos: Tuple[str, ...]
    validation_videos: Tuple[str, ...]
    test_videos: Tuple[str, ...]
    seed: int

    def check_disjoint(self):
        """Raise if any video appears in more than one partition"""
        train, validation, test = set(self.train_videos), set(self.validation_videos), set(self.test_videos)
        leaked = (train & validation) | (train & test) | (validation & test)
        if leaked:
            raise ProtocolError(f"fold {self.fold_index}: videos in more than one split: {sorted(leaked)}")


def _random_state(seed: int) -> int:
    return int(seed) % (2 ** 32)


def stratified_kfold(videos: Sequence[str], labels: Sequence[int], k: int, seed: int) -> List[FoldSplit]:
    """k train/test folds with per-class test counts differing by at most one.

    Validation lists are empty; see ``split_validation``.
    """
    if len(videos) != len(labels):
        raise ProtocolError("videos and labels differ in length")
    if len(set(videos)) != len(videos):
        raise ProtocolError("video identifiers must be unique")
    if k < 2:
        raise ProtocolError(f"k must be at least 2, got {k}")
    counts = Counter(labels)
    short = {label: n for label, n in counts.items() if n < k}
    if short:
        raise ProtocolError(f"classes with fewer than {k} videos: {short}")

    order = np.argsort(np.asarray(videos, dtype=object), kind='stable')
    ordered = [videos[i] for i in order]
    ordered_labels = np.asarray([labels[i] for i in order])

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=_random_state(seed))
    folds = []
    for index, (train_idx, test_idx) in enumerate(splitter.split(np.zeros(len(ordered)), ordered_labels)):
        folds.append(FoldSplit(
            fold_index=index,
            train_videos=tuple(ordered[i] for i in train_idx),
            validation_videos=(),
            test_videos=tuple(ordered[i] for i in test_idx),
            seed=int(seed),
        ))
    logger.debug(f"Built {k} stratified folds over {len(videos)} videos")
    return folds


def split_validation(train_videos: Sequence[str], labels: Sequence[int], fraction: float,
                     seed: int) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """Stratified hold-out of round-half-up(fraction * n) videos"""
    if not 0 < fraction < 1:
        raise ProtocolError(f"validation fraction must lie in (0, 1), got {fraction}")
    if len(train_videos) != len(labels):
        raise ProtocolError("videos and labels differ in length")
    n = len(train_videos)
    n_validation = round_half_up(fraction * n)
    counts = Counter(labels)
    if n_validation < len(counts) or n - n_validation < len(counts):
        raise ProtocolError(f"validation split of {n_validation} of {n} videos would empty a class")
    if min(counts.values()) < 2:
        raise ProtocolError("every class needs at least two training videos for a validation split")

    remaining, validation = train_test_split(
        list(train_videos), test_size=n_validation, stratify=list(labels),
        random_state=_random_state(seed), shuffle=True,
    )
    label_of = dict(zip(train_videos, labels))
    for part, members in (("validation", validation), ("training", remaining)):
        missing = sorted(set(counts) - {label_of[v] for v in members})
        if missing:
            raise ProtocolError(f"validation split of {n_validation} of {n} videos leaves no "
                                f"{part} video for classes {missing}")
    return tuple(remaining), tuple(validation)


def with_validation(fold: FoldSplit, labels_by_video: dict, fraction: float, seed: int) -> FoldSplit:
    train, validation = split_validation(
        fold.train_videos, [labels_by_video[v] for v in fold.train_videos], fraction, seed)
    split = replace(fold, train_videos=train, validation_videos=validation)
    split.check_disjoint()
    return split
