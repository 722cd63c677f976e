"""
Procedural gait simulation: skeleton, walk cycle, camera, occluders and ray-cast visibility.
"""

from workflow.simulator.skeleton import SkeletonTopology, build_skeleton, load_skeleton_file
from workflow.simulator.camera import CameraPose, sample_camera
from workflow.simulator.gait import GaitClass, PoseSequence, frame_count_for, generate_gait
from workflow.simulator.scene import Corridor, Occluder, animate_relative_motion, populate_scene
from workflow.simulator.raycast import body_proxies, compute_visibility, ray_visibility
from workflow.simulator.pose_file import read_pose_file, write_pose_file
from workflow.simulator.pipeline import joint_positions, simulate_sequence

__all__ = [
    'SkeletonTopology',
    'build_skeleton',
    'load_skeleton_file',
    'CameraPose',
    'sample_camera',
    'GaitClass',
    'PoseSequence',
    'frame_count_for',
    'generate_gait',
    'Corridor',
    'Occluder',
    'animate_relative_motion',
    'populate_scene',
    'body_proxies',
    'compute_visibility',
    'ray_visibility',
    'read_pose_file',
    'write_pose_file',
    'joint_positions',
    'simulate_sequence',
]
