#!/usr/bin/env python3
"""Per-joint visibility by casting a ray from the camera to each joint.

The dog mesh is approximated by one capsule per bone. A joint is never
occluded by the capsules of bones that start or end at it.
"""

import logging
from typing import List, Sequence, Union

import numpy as np

from workflow.errors import ParameterError
from workflow.simulator.camera import CameraPose
from workflow.simulator.geometry import Capsule, Sphere, ray_sphere_interval, segment_segment_distances
from workflow.simulator.scene import Occluder
from workflow.simulator.skeleton import SkeletonTopology

logger = logging.getLogger('gaitlab.simulator.raycast')

# Fraction of the ray length left unchecked next to the target
RAY_EPSILON = 1e-6

BodyProxy = Union[Capsule, Sphere]


def body_proxies(topology: SkeletonTopology, joint_positions: np.ndarray) -> List[Capsule]:
    """One capsule per bone at the given joint positions (N, 3)"""
    return [
        Capsule(a=tuple(joint_positions[a]), b=tuple(joint_positions[b]), radius=radius, bone=i)
        for i, ((a, b), radius) in enumerate(zip(topology.edges, topology.bone_radii))
    ]


def _interval_blocks(interval, t_max: float) -> bool:
    if interval is None:
        return False
    t0, t1 = interval
    return t1 > 0.0 and t0 < t_max


def _proxies_block(origin: np.ndarray, end: np.ndarray, proxies: Sequence[BodyProxy]) -> bool:
    capsules = [p for p in proxies if isinstance(p, Capsule)]
    spheres = [p for p in proxies if isinstance(p, Sphere)]
    if capsules:
        a = np.asarray([c.a for c in capsules], dtype=np.float64)
        b = np.asarray([c.b for c in capsules], dtype=np.float64)
        radii = np.asarray([c.radius for c in capsules], dtype=np.float64)
        if np.any(segment_segment_distances(origin, end, a, b) < radii):
            return True
    direction = end - origin
    for sphere in spheres:
        if _interval_blocks(ray_sphere_interval(origin, direction, sphere.center, sphere.radius), 1.0):
            return True
    return False


def ray_visibility(camera: Union[CameraPose, Sequence[float]], target: Sequence[float],
                   occluders: Sequence[Occluder], body_proxies: Sequence[BodyProxy]) -> bool:
    """True when nothing blocks the ray from the camera to ``target``.

    ``body_proxies`` must already exclude the proxies owned by the target
    joint. Only the part of the ray with ``t`` in ``[0, 1 - RAY_EPSILON]``
    is tested.
    """
    origin = camera.position if isinstance(camera, CameraPose) else np.asarray(camera, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    direction = target - origin
    if not np.linalg.norm(direction) > 0.0:
        raise ParameterError("camera position coincides with the target")

    t_max = 1.0 - RAY_EPSILON
    for occluder in occluders:
        if _interval_blocks(occluder.ray_interval(origin, direction), t_max):
            return False
    if body_proxies and _proxies_block(origin, origin + t_max * direction, body_proxies):
        return False
    return True


def compute_visibility(topology: SkeletonTopology, joint_positions: np.ndarray, camera: CameraPose,
                       occluders: Sequence[Occluder], occluder_positions: np.ndarray) -> np.ndarray:
    """Visibility of every joint in every frame, shape (frames, N).

    ``joint_positions`` has shape (frames, N, 3); ``occluder_positions`` holds
    the animated occluder centers with shape (frames, K, 3).
    """
    frames, n_joints, _ = joint_positions.shape
    origin = camera.position
    edges = np.asarray(topology.edges, dtype=np.int64)
    radii = np.asarray(topology.bone_radii, dtype=np.float64)
    # bones owned by each joint
    owned = np.zeros((n_joints, len(edges)), dtype=bool)
    owned[edges[:, 0], np.arange(len(edges))] = True
    owned[edges[:, 1], np.arange(len(edges))] = True

    t_max = 1.0 - RAY_EPSILON
    visible = np.ones((frames, n_joints), dtype=bool)
    for f in range(frames):
        positions = joint_positions[f]
        a, b = positions[edges[:, 0]], positions[edges[:, 1]]
        moved = [o.moved_to(c) for o, c in zip(occluders, occluder_positions[f])]
        for j in range(n_joints):
            direction = positions[j] - origin
            if not np.linalg.norm(direction) > 0.0:
                raise ParameterError("camera position coincides with a joint")
            if any(_interval_blocks(o.ray_interval(origin, direction), t_max) for o in moved):
                visible[f, j] = False
                continue
            others = ~owned[j]
            distances = segment_segment_distances(origin, origin + t_max * direction, a[others], b[others])
            if np.any(distances < radii[others]):
                visible[f, j] = False
    logger.debug(f"Visible joint fraction: {visible.mean():.3f}")
    return visible
