#!/usr/bin/env python3
"""Pose directory layout: one subdirectory per angle group, one file per video."""

import logging
from pathlib import Path
from typing import List, Tuple, Union

from workflow.errors import ValidationError
from workflow.simulator.gait import GaitClass, PoseSequence, frame_count_for
from workflow.simulator.pose_file import read_pose_file

logger = logging.getLogger('gaitlab.dataset.loading')


def group_dirname(group: Tuple[float, float]) -> str:
    lo, hi = group
    return f"group_{lo:g}-{hi:g}"


def video_id(gait_class: GaitClass, index: int) -> str:
    return f"{GaitClass.parse(gait_class).value}_{index:02d}"


def pose_path(pose_dir: Union[str, Path], group: Tuple[float, float], gait_class: GaitClass, index: int) -> Path:
    return Path(pose_dir) / group_dirname(group) / f"{video_id(gait_class, index)}.json"


def load_group(pose_dir: Union[str, Path], group: Tuple[float, float], fps: int,
               duration_s: float) -> List[Tuple[str, PoseSequence]]:
    """Read every pose file of one angle group, sorted by video id.

    Raises ``FileNotFoundError`` naming the group when its directory is
    absent or empty, and ``ValidationError`` when a file disagrees with the
    configured frame rate or duration.
    """
    directory = Path(pose_dir) / group_dirname(group)
    files = sorted(directory.glob("*.json")) if directory.is_dir() else []
    if not files:
        raise FileNotFoundError(f"no pose files for angle group {group[0]:g}-{group[1]:g} in {directory}")

    expected_frames = frame_count_for(duration_s, fps)
    videos = []
    for path in files:
        sequence = read_pose_file(path)
        if sequence.fps != fps:
            raise ValidationError(f"{path}: fps {sequence.fps} does not match config fps {fps}")
        if sequence.frame_count != expected_frames:
            raise ValidationError(f"{path}: {sequence.frame_count} frames, config expects {expected_frames}")
        videos.append((path.stem, sequence))
    logger.info(f"Loaded {len(videos)} pose files from {directory}")
    return videos
