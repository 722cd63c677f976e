#!/usr/bin/env python3

import numpy as np

from workflow.simulator.skeleton import SkeletonTopology


def normalize_adjacency(adjacency: np.ndarray) -> np.ndarray:
    """Symmetric normalization with self-loops: D^-1/2 (A + I) D^-1/2"""
    adjacency = np.asarray(adjacency, dtype=np.float64)
    with_loops = adjacency + np.eye(adjacency.shape[0])
    inv_sqrt = 1.0 / np.sqrt(with_loops.sum(axis=1))
    return with_loops * inv_sqrt[:, None] * inv_sqrt[None, :]


def build_normalized_adjacency(topology: SkeletonTopology) -> np.ndarray:
    return normalize_adjacency(topology.adjacency_matrix())
