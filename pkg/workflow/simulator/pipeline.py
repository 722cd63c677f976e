#!/usr/bin/env python3

import logging
from typing import Optional, Tuple

import numpy as np

from utils import derive_seed
from workflow.context import SimulationConfig
from workflow.simulator.camera import sample_camera
from workflow.simulator.gait import GaitClass, PoseSequence, frame_count_for, generate_gait
from workflow.simulator.raycast import compute_visibility
from workflow.simulator.scene import Corridor, animate_relative_motion, populate_scene
from workflow.simulator.skeleton import SkeletonTopology

logger = logging.getLogger('gaitlab.simulator.pipeline')


def joint_positions(sequence: PoseSequence, topology: SkeletonTopology) -> np.ndarray:
    """Recover (frames, N, 3) joint positions from the bone endpoints"""
    positions = np.empty((sequence.frame_count, topology.n_joints, 3))
    for joint, (bone, end) in enumerate(topology.joint_endpoints()):
        positions[:, joint] = sequence.heads[:, bone] if end == 'head' else sequence.tails[:, bone]
    return positions


def simulate_sequence(topology: SkeletonTopology, gait_class, angle_interval: Tuple[float, float],
                      seed: int, config: Optional[SimulationConfig] = None) -> PoseSequence:
    """Simulate one labeled video: gait, camera, occluders and per-joint visibility.

    The gait uses ``seed`` directly; camera and scene draw from seeds derived
    from it.
    """
    config = config or SimulationConfig()
    gait_class = GaitClass.parse(gait_class)
    sequence = generate_gait(
        topology, gait_class, config.duration_s, config.fps, seed,
        period_range_s=config.gait_period_range_s,
        amplitude_scale=config.affected_amplitude_scale,
        phase_shift=config.affected_phase_shift,
    )
    camera = sample_camera(
        angle_interval[0], angle_interval[1], derive_seed(seed, "camera"),
        elevation_range_deg=config.elevation_range_deg,
        distance_range_m=config.distance_range_m,
        focal_length=config.focal_length,
        principal_point=config.principal_point,
        look_at=(0.0, 0.0, config.look_at_height_m),
    )

    velocity = (config.forward_speed_mps, 0.0, 0.0)
    corridor = Corridor().swept(velocity, config.duration_s)
    occluders = populate_scene(
        config.occluder_density, config.scene_area_m2, corridor, derive_seed(seed, "scene"),
        dog_velocity=velocity,
        region_center=(config.forward_speed_mps * config.duration_s / 2.0, 0.0),
    )
    frames = frame_count_for(config.duration_s, config.fps)
    occluder_positions = animate_relative_motion(occluders, velocity, frames, config.fps)

    positions = joint_positions(sequence, topology)
    visible = compute_visibility(topology, positions, camera, occluders, occluder_positions)
    edges = np.asarray(topology.edges, dtype=np.int64)
    logger.debug(f"Simulated {gait_class.value} video seed={seed}: azimuth {camera.azimuth_deg:.1f}, "
                 f"{len(occluders)} occluders, {visible.mean():.1%} joints visible")
    return sequence.with_visibility(visible[:, edges[:, 0]], visible[:, edges[:, 1]], camera=camera)
