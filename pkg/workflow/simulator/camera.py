#!/usr/bin/env python3

import math
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from workflow.errors import ParameterError

logger = logging.getLogger('gaitlab.simulator.camera')

DEFAULT_LOOK_AT = (0.0, 0.0, 0.4)


@dataclass(frozen=True)
class CameraPose:
    """Stationary pinhole camera aimed at ``look_at``.

    Azimuth is measured around the vertical axis from the dog's rear (0°)
    towards its left flank (90°), front (180°) and right flank (270°).
    """
    azimuth_deg: float
    elevation_deg: float
    distance_m: float
    focal_length: float
    principal_point: Tuple[float, float]
    look_at: Tuple[float, float, float] = DEFAULT_LOOK_AT

    def __post_init__(self):
        if not self.distance_m > 0:
            raise ParameterError(f"camera distance must be positive, got {self.distance_m}")
        if not self.focal_length > 0:
            raise ParameterError(f"focal length must be positive, got {self.focal_length}")
        if not -90.0 < self.elevation_deg < 90.0:
            raise ParameterError(f"elevation must lie in (-90, 90), got {self.elevation_deg}")

    @property
    def position(self) -> np.ndarray:
        azimuth = math.radians(self.azimuth_deg)
        elevation = math.radians(self.elevation_deg)
        direction = np.array([
            -math.cos(elevation) * math.cos(azimuth),
            math.cos(elevation) * math.sin(azimuth),
            math.sin(elevation),
        ])
        return np.asarray(self.look_at, dtype=np.float64) + self.distance_m * direction

    @property
    def rotation(self) -> np.ndarray:
        """Rows are the camera right, down and forward axes in world coordinates"""
        forward = np.asarray(self.look_at, dtype=np.float64) - self.position
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.array([0.0, 0.0, 1.0]))
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        return np.stack([right, down, forward])

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return (points - self.position) @ self.rotation.T

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Pinhole projection of world points.

        Returns image coordinates ``(..., 2)`` and a mask of points strictly in
        front of the camera plane; coordinates behind the camera are zero.
        """
        cam = self.world_to_camera(points)
        depth = cam[..., 2]
        in_front = depth > 0
        safe = np.where(in_front, depth, 1.0)
        u = self.principal_point[0] + self.focal_length * cam[..., 0] / safe
        v = self.principal_point[1] + self.focal_length * cam[..., 1] / safe
        uv = np.stack([u, v], axis=-1)
        uv[~in_front] = 0.0
        return uv, in_front

    def to_dict(self) -> dict:
        return {
            'azimuth_deg': float(self.azimuth_deg),
            'elevation_deg': float(self.elevation_deg),
            'distance_m': float(self.distance_m),
            'focal_length': float(self.focal_length),
            'principal_point': [float(c) for c in self.principal_point],
            'look_at': [float(c) for c in self.look_at],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CameraPose':
        return cls(
            azimuth_deg=float(data['azimuth_deg']),
            elevation_deg=float(data['elevation_deg']),
            distance_m=float(data['distance_m']),
            focal_length=float(data['focal_length']),
            principal_point=tuple(float(c) for c in data['principal_point']),
            look_at=tuple(float(c) for c in data.get('look_at', DEFAULT_LOOK_AT)),
        )


def sample_camera(angle_lo: float, angle_hi: float, seed: int,
                  elevation_range_deg: Tuple[float, float] = (5.0, 25.0),
                  distance_range_m: Tuple[float, float] = (3.0, 6.0),
                  focal_length: float = 800.0,
                  principal_point: Tuple[float, float] = (640.0, 360.0),
                  look_at: Tuple[float, float, float] = DEFAULT_LOOK_AT) -> CameraPose:
    """Draw a camera whose azimuth is uniform in ``[angle_lo, angle_hi)``"""
    if not 0.0 <= angle_lo <= angle_hi <= 360.0:
        raise ParameterError(f"invalid angle interval [{angle_lo}, {angle_hi}]")
    rng = np.random.default_rng(seed)
    if angle_hi > angle_lo:
        azimuth = float(rng.uniform(angle_lo, angle_hi))
        # uniform() may round up to the open bound
        azimuth = min(azimuth, float(np.nextafter(angle_hi, angle_lo)))
    else:
        azimuth = float(angle_lo)
        rng.uniform()
    elevation = float(rng.uniform(*elevation_range_deg))
    distance = float(rng.uniform(*distance_range_m))
    return CameraPose(
        azimuth_deg=azimuth,
        elevation_deg=elevation,
        distance_m=distance,
        focal_length=float(focal_length),
        principal_point=tuple(principal_point),
        look_at=tuple(look_at),
    )
