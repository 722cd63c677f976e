#!/usr/bin/env python3
"""Node features for one window: raw coordinates, visibility mask and masked z-scores."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from workflow.errors import ParameterError, ValidationError
from workflow.simulator.gait import PoseSequence
from workflow.simulator.skeleton import SkeletonTopology
from workflow.dataset.windows import window_sequence

logger = logging.getLogger('gaitlab.dataset.features')

MASK_VALUE = -1.0
SIGMA_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class GraphSample:
    """One fixed-length window of one video.

    ``features`` has shape (N, T, D) and ``mask`` shape (N, T); masked
    entries hold exactly ``MASK_VALUE``.
    """
    features: np.ndarray
    adjacency: np.ndarray
    label: int
    mask: np.ndarray
    source_video: str
    window_start: int

    @property
    def n_nodes(self) -> int:
        return int(self.features.shape[0])

    @property
    def timestep(self) -> int:
        return int(self.features.shape[1])

    @property
    def dimensionality(self) -> int:
        return int(self.features.shape[2])


def extract_features(sequence: PoseSequence, window: Tuple[int, int], dimensionality: str,
                     endpoints: Sequence[Tuple[int, str]]) -> Tuple[np.ndarray, np.ndarray]:
    """Raw (N, T, D) coordinates and (N, T) mask for the frames in ``window``.

    3D gives global positions, 2D gives pinhole image coordinates from the
    sequence camera. Joints behind the camera plane are masked in 2D.
    """
    start, end = window
    if not 0 <= start < end <= sequence.frame_count:
        raise ParameterError(f"window {window} outside sequence of {sequence.frame_count} frames")
    if sequence.head_visible is None or sequence.tail_visible is None:
        raise ValidationError("sequence has no visibility flags")

    bones = np.asarray([bone for bone, _ in endpoints], dtype=np.int64)
    is_head = np.asarray([end_name == 'head' for _, end_name in endpoints])
    frames = slice(start, end)
    positions = np.where(is_head[None, :, None],
                         sequence.heads[frames][:, bones], sequence.tails[frames][:, bones])
    visible = np.where(is_head[None, :], sequence.head_visible[frames][:, bones],
                       sequence.tail_visible[frames][:, bones])

    if dimensionality == "3D":
        raw = positions
    elif dimensionality == "2D":
        if sequence.camera is None:
            raise ValidationError("2D features need a camera pose")
        raw, in_front = sequence.camera.project(positions)
        visible = visible & in_front
    else:
        raise ParameterError(f"unknown dimensionality: {dimensionality!r}")

    # (T, N, D) -> (N, T, D)
    return np.ascontiguousarray(raw.transpose(1, 0, 2)), np.ascontiguousarray(visible.T)


def mask_and_standardize(features: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Z-standardize each node channel over time using unmasked frames only.

    ``features`` has shape (N, T, D); ``mask`` has shape (N, T) or (N, T, D).
    Masked entries become ``MASK_VALUE``. Channels with fewer than two
    unmasked frames or a population std below ``SIGMA_FLOOR`` become 0.
    """
    features = np.asarray(features, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape == features.shape[:-1]:
        mask = np.broadcast_to(mask[..., None], features.shape)
    if mask.shape != features.shape:
        raise ParameterError(f"mask shape {mask.shape} does not match features {features.shape}")

    weights = mask.astype(np.float64)
    values = np.where(mask, features, 0.0)
    count = weights.sum(axis=1, keepdims=True)
    safe_count = np.maximum(count, 1.0)
    mean = values.sum(axis=1, keepdims=True) / safe_count
    centered = np.where(mask, features - mean, 0.0)
    sigma = np.sqrt((centered * centered).sum(axis=1, keepdims=True) / safe_count)

    degenerate = (count < 2) | (sigma < SIGMA_FLOOR)
    scaled = centered / np.where(degenerate, 1.0, sigma)
    standardized = np.where(degenerate, 0.0, scaled)
    return np.where(mask, standardized, MASK_VALUE)


def build_video_samples(sequence: PoseSequence, topology: SkeletonTopology, timestep: int,
                        dimensionality: str, adjacency: np.ndarray, video_id: str,
                        endpoints: Optional[Sequence[Tuple[int, str]]] = None) -> List[GraphSample]:
    """Every window of one video as standardized graph samples"""
    endpoints = endpoints if endpoints is not None else topology.joint_endpoints()
    samples = []
    for window in window_sequence(sequence.frame_count, timestep):
        raw, mask = extract_features(sequence, window, dimensionality, endpoints)
        samples.append(GraphSample(
            features=mask_and_standardize(raw, mask),
            adjacency=adjacency,
            label=sequence.label.label,
            mask=mask,
            source_video=video_id,
            window_start=window[0],
        ))
    logger.debug(f"Built {len(samples)} {dimensionality} samples of {timestep} frames from {video_id}")
    return samples
