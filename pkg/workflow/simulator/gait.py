#!/usr/bin/env python3

import math
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from utils import round_half_up
from workflow.errors import ParameterError, ValidationError
from workflow.simulator.camera import CameraPose
from workflow.simulator.skeleton import SkeletonTopology

logger = logging.getLogger('gaitlab.simulator.gait')

# Per limb depth (limb root, 2nd, 3rd, tip); meters
SWING_AMPLITUDE = (0.02, 0.06, 0.10, 0.14)
LIFT_AMPLITUDE = (0.03, 0.03, 0.05, 0.07)


class GaitClass(Enum):
    HEALTHY = "healthy"
    UNHEALTHY = "unhealthy"

    @property
    def label(self) -> int:
        return 1 if self is GaitClass.UNHEALTHY else 0

    @classmethod
    def parse(cls, value) -> 'GaitClass':
        if isinstance(value, GaitClass):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown gait class: {value!r}")


@dataclass(frozen=True)
class GaitParameters:
    """Per-sequence randomisation, identical for both classes under one seed"""
    period_s: float
    base_phase: float
    amplitude_gain: float
    roll_amplitude: float
    pitch_amplitude: float

    @classmethod
    def sample(cls, seed: int, period_range_s: Tuple[float, float] = (0.7, 0.9)) -> 'GaitParameters':
        rng = np.random.default_rng(seed)
        return cls(
            period_s=float(rng.uniform(*period_range_s)),
            base_phase=float(rng.uniform(0.0, 1.0)),
            amplitude_gain=float(rng.uniform(0.85, 1.15)),
            roll_amplitude=float(rng.uniform(0.06, 0.12)),
            pitch_amplitude=float(rng.uniform(0.02, 0.04)),
        )


class GaitModel:
    """Parametric walk: phase-offset limb oscillation plus rigid trunk roll and pitch.

    Limb joints swing fore-aft sinusoidally; the limb root bobs vertically and
    lower joints lift with a half-rectified sine. For the unhealthy class the
    affected joints and their descendants use a scaled amplitude and a shifted
    phase. The root joint never moves.
    """

    def __init__(self, topology: SkeletonTopology, params: GaitParameters, gait_class: GaitClass,
                 amplitude_scale: float = 0.4, phase_shift: float = 0.15):
        self.topology = topology
        self.params = params
        self.gait_class = GaitClass.parse(gait_class)
        n = topology.n_joints
        self.depths = topology.limb_depths()
        self.phases = np.array([0.0 if p is None else p for p in topology.limb_phases])
        self.scale = np.ones(n)
        self.shift = np.zeros(n)
        if self.gait_class is GaitClass.UNHEALTHY:
            affected = list(topology.affected_with_descendants())
            self.scale[affected] = amplitude_scale
            self.shift[affected] = phase_shift

        limb = self.depths >= 0
        depth = np.clip(self.depths, 0, len(SWING_AMPLITUDE) - 1)
        self.swing = np.where(limb, np.take(SWING_AMPLITUDE, depth), 0.0)
        self.lift = np.where(limb, np.take(LIFT_AMPLITUDE, depth), 0.0)
        self.limb_root = limb & (self.depths == 0)

    def positions(self, times: np.ndarray) -> np.ndarray:
        """Global joint positions with shape (len(times), N, 3)"""
        times = np.asarray(times, dtype=np.float64)
        p = self.params
        cycle = times / p.period_s + p.base_phase

        rest = self.topology.rest_positions
        root = rest[0]
        offsets = rest - root
        roll = p.roll_amplitude * np.sin(2.0 * math.pi * cycle)
        pitch = p.pitch_amplitude * np.sin(4.0 * math.pi * cycle)
        rotated = _rotate(offsets, roll, pitch) + root

        phi = 2.0 * math.pi * (cycle[:, None] + self.phases[None, :] + self.shift[None, :])
        gain = p.amplitude_gain * self.scale[None, :]
        sin_phi = np.sin(phi)
        vertical = np.where(self.limb_root[None, :], sin_phi, np.maximum(sin_phi, 0.0))

        displacement = np.zeros_like(rotated)
        displacement[..., 0] = gain * self.swing[None, :] * sin_phi
        displacement[..., 2] = gain * self.lift[None, :] * vertical
        return rotated + displacement


def _rotate(offsets: np.ndarray, roll: np.ndarray, pitch: np.ndarray) -> np.ndarray:
    """Apply roll about x then pitch about y to every offset, per time step"""
    cr, sr = np.cos(roll)[:, None], np.sin(roll)[:, None]
    cp, sp = np.cos(pitch)[:, None], np.sin(pitch)[:, None]
    x, y, z = offsets[None, :, 0], offsets[None, :, 1], offsets[None, :, 2]
    y1 = cr * y - sr * z
    z1 = sr * y + cr * z
    x2 = cp * x + sp * z1
    z2 = -sp * x + cp * z1
    return np.stack([x2, y1, z2], axis=-1)


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """Per-frame bone endpoints in global coordinates with visibility flags.

    Arrays have shape (frames, bones, 3) for locations and (frames, bones)
    for visibility. Visibility is ``None`` until ray casting fills it.
    """
    bone_names: Tuple[str, ...]
    heads: np.ndarray
    tails: np.ndarray
    label: GaitClass
    fps: int
    seed: int
    camera: Optional[CameraPose] = None
    head_visible: Optional[np.ndarray] = None
    tail_visible: Optional[np.ndarray] = None

    @property
    def frame_count(self) -> int:
        return int(self.heads.shape[0])

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.fps

    def with_visibility(self, head_visible: np.ndarray, tail_visible: np.ndarray,
                        camera: Optional[CameraPose] = None) -> 'PoseSequence':
        return replace(self, head_visible=np.asarray(head_visible, dtype=bool),
                       tail_visible=np.asarray(tail_visible, dtype=bool),
                       camera=camera if camera is not None else self.camera)

    def validate(self):
        if self.frame_count == 0:
            raise ValidationError("pose sequence has no frames")
        n_bones = len(self.bone_names)
        expected = (self.frame_count, n_bones, 3)
        if self.heads.shape != expected or self.tails.shape != expected:
            raise ValidationError(f"bone locations must have shape {expected}")
        if not (np.all(np.isfinite(self.heads)) and np.all(np.isfinite(self.tails))):
            raise ValidationError("bone locations must be finite")
        if self.head_visible is None or self.tail_visible is None:
            raise ValidationError("visibility flags are missing")
        if self.head_visible.shape != expected[:2] or self.tail_visible.shape != expected[:2]:
            raise ValidationError(f"visibility flags must have shape {expected[:2]}")
        if self.camera is None:
            raise ValidationError("camera pose is missing")
        if not self.fps > 0:
            raise ValidationError("fps must be positive")


def frame_count_for(duration_s: float, fps: int) -> int:
    if not duration_s > 0:
        raise ParameterError(f"duration must be positive, got {duration_s}")
    if isinstance(fps, bool) or not isinstance(fps, (int, np.integer)) or fps <= 0:
        raise ParameterError(f"fps must be a positive integer, got {fps!r}")
    frames = round_half_up(duration_s * fps)
    if frames < 1:
        raise ParameterError(f"duration {duration_s}s at {fps} fps yields no frames")
    return frames


def generate_gait(topology: SkeletonTopology, gait_class, duration_s: float, fps: int, seed: int,
                  period_range_s: Tuple[float, float] = (0.7, 0.9),
                  amplitude_scale: float = 0.4, phase_shift: float = 0.15) -> PoseSequence:
    """Generate bone head/tail trajectories for one video; visibility is left empty"""
    gait_class = GaitClass.parse(gait_class)
    frames = frame_count_for(duration_s, fps)
    params = GaitParameters.sample(seed, period_range_s)
    model = GaitModel(topology, params, gait_class, amplitude_scale, phase_shift)

    times = np.arange(frames, dtype=np.float64) / fps
    positions = model.positions(times)
    edges = np.asarray(topology.edges, dtype=np.int64)
    logger.debug(f"Generated {gait_class.value} gait: {frames} frames, period {params.period_s:.3f}s")
    return PoseSequence(
        bone_names=topology.bone_names,
        heads=positions[:, edges[:, 0], :],
        tails=positions[:, edges[:, 1], :],
        label=gait_class,
        fps=int(fps),
        seed=int(seed),
    )
