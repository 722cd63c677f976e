#!/usr/bin/env python3
"""Scene occluders placed around the dog and animated by relative motion.

The dog and the camera stay fixed; occluders move with the negated dog
velocity, so the dog appears to walk through the scene.
"""

import math
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from workflow.errors import ParameterError
from workflow.simulator.geometry import box_box_gap, ray_box_interval, ray_sphere_interval, sphere_box_gap

logger = logging.getLogger('gaitlab.simulator.scene')

MIN_VOLUME = 0.1
MAX_VOLUME = 10.0
SHAPES = ('sphere', 'box')

# Dog body bounds in the dog frame (x forward, y left, z up); meters
BODY_LO = (-0.45, -0.25, 0.0)
BODY_HI = (0.70, 0.25, 0.95)


@dataclass(frozen=True)
class Corridor:
    """Axis-aligned region the dog body occupies or sweeps through"""
    lo: Tuple[float, float, float] = BODY_LO
    hi: Tuple[float, float, float] = BODY_HI

    def swept(self, dog_velocity: Sequence[float], duration_s: float) -> 'Corridor':
        """Hull of the body over the clip, seen from the occluders' frame.

        An occluder moving by ``-v t`` meets the fixed body exactly when its
        start position meets the body shifted by ``+v t``. The hull is exact
        for axis-aligned velocities and conservative otherwise.
        """
        travel = np.asarray(dog_velocity, dtype=np.float64) * duration_s
        lo = np.asarray(self.lo) + np.minimum(travel, 0.0)
        hi = np.asarray(self.hi) + np.maximum(travel, 0.0)
        return Corridor(tuple(float(c) for c in lo), tuple(float(c) for c in hi))


@dataclass(frozen=True)
class Occluder:
    """Sphere (``size = (radius,)``) or axis-aligned box (``size`` = half extents)"""
    shape: str
    center: Tuple[float, float, float]
    size: Tuple[float, ...]
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def volume(self) -> float:
        if self.shape == 'sphere':
            return 4.0 / 3.0 * math.pi * self.size[0] ** 3
        return 8.0 * self.size[0] * self.size[1] * self.size[2]

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        center = np.asarray(self.center, dtype=np.float64)
        half = np.full(3, self.size[0]) if self.shape == 'sphere' else np.asarray(self.size, dtype=np.float64)
        return center - half, center + half

    def at(self, time_s: float) -> 'Occluder':
        center = np.asarray(self.center) + np.asarray(self.velocity) * time_s
        return replace(self, center=tuple(float(c) for c in center))

    def moved_to(self, center: Sequence[float]) -> 'Occluder':
        return replace(self, center=tuple(float(c) for c in center))

    def gap(self, corridor: Corridor) -> float:
        """Separation from the corridor; <= 0 means they intersect"""
        if self.shape == 'sphere':
            return sphere_box_gap(self.center, self.size[0], corridor.lo, corridor.hi)
        lo, hi = self.bounds()
        return box_box_gap(lo, hi, corridor.lo, corridor.hi)

    def ray_interval(self, origin, direction) -> Optional[Tuple[float, float]]:
        if self.shape == 'sphere':
            return ray_sphere_interval(origin, direction, self.center, self.size[0])
        lo, hi = self.bounds()
        return ray_box_interval(origin, direction, lo, hi)


def _sample_candidate(rng: np.random.Generator, half_side: float, region_center: Tuple[float, float],
                      velocity: Tuple[float, float, float]) -> Occluder:
    shape = SHAPES[int(rng.integers(len(SHAPES)))]
    x = region_center[0] + rng.uniform(-half_side, half_side)
    y = region_center[1] + rng.uniform(-half_side, half_side)
    if shape == 'sphere':
        size = (float(rng.uniform(0.25, 1.35)),)
        z = size[0]
    else:
        size = tuple(float(v) for v in rng.uniform(0.1, 1.3, size=3))
        z = size[2]
    return Occluder(shape=shape, center=(float(x), float(y), float(z)), size=size, velocity=velocity)


def populate_scene(density: float, area: float, corridor: Corridor, seed: int,
                   dog_velocity: Sequence[float] = (0.0, 0.0, 0.0),
                   region_center: Tuple[float, float] = (0.0, 0.0)) -> List[Occluder]:
    """Place occluders on the floor of a square region of ``area`` square meters.

    The candidate count is Poisson with mean ``density * area``. Candidates
    outside the volume bounds or touching the corridor are dropped, not
    replaced. ``corridor`` must already be swept over the clip duration.
    """
    if density < 0:
        raise ParameterError(f"density must be non-negative, got {density}")
    if not area > 0:
        raise ParameterError(f"area must be positive, got {area}")
    rng = np.random.default_rng(seed)
    velocity = tuple(-float(v) for v in dog_velocity)
    half_side = math.sqrt(area) / 2.0

    n_candidates = int(rng.poisson(density * area))
    occluders, rejected = [], 0
    for _ in range(n_candidates):
        candidate = _sample_candidate(rng, half_side, region_center, velocity)
        if not MIN_VOLUME < candidate.volume < MAX_VOLUME or candidate.gap(corridor) <= 0.0:
            rejected += 1
            continue
        occluders.append(candidate)
    logger.debug(f"Placed {len(occluders)} occluders, rejected {rejected} of {n_candidates} candidates")
    return occluders


def animate_relative_motion(occluders: Sequence[Occluder], dog_forward_velocity: Sequence[float],
                            frame_count: int, fps: float) -> np.ndarray:
    """Occluder centers per frame, shape (frame_count, len(occluders), 3)"""
    if not fps > 0:
        raise ParameterError(f"fps must be positive, got {fps}")
    times = np.arange(frame_count, dtype=np.float64) / fps
    if not occluders:
        return np.zeros((frame_count, 0, 3))
    initial = np.asarray([o.center for o in occluders], dtype=np.float64)
    velocity = np.asarray(dog_forward_velocity, dtype=np.float64)
    return initial[None, :, :] - times[:, None, None] * velocity[None, None, :]
