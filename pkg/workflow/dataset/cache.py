#!/usr/bin/env python3

import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from workflow.errors import ValidationError
from workflow.dataset.features import GraphSample

logger = logging.getLogger('gaitlab.dataset.cache')

CACHE_FORMAT_VERSION = 1


def save_samples(path: Union[str, Path], samples: List[GraphSample]):
    """Store samples sharing one adjacency in a compressed npz container"""
    if not samples:
        raise ValidationError("no samples to cache")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        format_version=np.array(CACHE_FORMAT_VERSION),
        features=np.stack([s.features for s in samples]),
        mask=np.stack([s.mask for s in samples]),
        labels=np.asarray([s.label for s in samples], dtype=np.int64),
        source_video=np.asarray([s.source_video for s in samples], dtype=str),
        window_start=np.asarray([s.window_start for s in samples], dtype=np.int64),
        adjacency=samples[0].adjacency,
    )
    logger.debug(f"Cached {len(samples)} samples to {path}")


def load_samples(path: Union[str, Path]) -> List[GraphSample]:
    with np.load(path, allow_pickle=False) as data:
        version = int(data['format_version'])
        if version != CACHE_FORMAT_VERSION:
            raise ValidationError(f"{path}: unsupported cache format version {version}")
        adjacency = data['adjacency']
        return [
            GraphSample(features=features, adjacency=adjacency, label=int(label), mask=mask,
                        source_video=str(video), window_start=int(start))
            for features, mask, label, video, start in zip(
                data['features'], data['mask'], data['labels'], data['source_video'], data['window_start'])
        ]
