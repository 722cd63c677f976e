"""
Graph datasets: adjacency normalization, windowing, masked features and video-level splits.
"""

from workflow.dataset.adjacency import build_normalized_adjacency, normalize_adjacency
from workflow.dataset.windows import overlap_for, window_sequence
from workflow.dataset.features import (
    MASK_VALUE,
    GraphSample,
    build_video_samples,
    extract_features,
    mask_and_standardize,
)
from workflow.dataset.splits import FoldSplit, split_validation, stratified_kfold, with_validation
from workflow.dataset.loading import group_dirname, load_group, pose_path, video_id
from workflow.dataset.cache import load_samples, save_samples

__all__ = [
    'build_normalized_adjacency',
    'normalize_adjacency',
    'overlap_for',
    'window_sequence',
    'MASK_VALUE',
    'GraphSample',
    'build_video_samples',
    'extract_features',
    'mask_and_standardize',
    'FoldSplit',
    'split_validation',
    'stratified_kfold',
    'with_validation',
    'group_dirname',
    'load_group',
    'pose_path',
    'video_id',
    'load_samples',
    'save_samples',
]
