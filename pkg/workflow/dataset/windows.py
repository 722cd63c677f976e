#!/usr/bin/env python3

from typing import List, Tuple

from workflow.errors import ParameterError


def overlap_for(timestep: int) -> int:
    """Frames shared by consecutive windows of length ``timestep``"""
    return timestep // 2


def window_sequence(length: int, timestep: int) -> List[Tuple[int, int]]:
    """Half-open ``(start, end)`` windows of ``timestep`` frames with floor(T/2) overlap"""
    if timestep < 1:
        raise ParameterError(f"timestep must be at least 1, got {timestep}")
    stride = timestep - overlap_for(timestep)
    return [(start, start + timestep) for start in range(0, length - timestep + 1, stride)]
