#!/usr/bin/env python3
"""JSON pose files: one document per video with per-frame bone records."""

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np

from utils import write_json
from workflow.errors import ParameterError, ValidationError
from workflow.simulator.camera import CameraPose
from workflow.simulator.gait import GaitClass, PoseSequence

logger = logging.getLogger('gaitlab.simulator.pose_file')

POSE_FORMAT_VERSION = 1


def pose_document(sequence: PoseSequence) -> dict:
    sequence.validate()
    frames = []
    for f in range(sequence.frame_count):
        frames.append([
            {
                'name': name,
                'head': [float(c) for c in sequence.heads[f, b]],
                'tail': [float(c) for c in sequence.tails[f, b]],
                'head_visible': bool(sequence.head_visible[f, b]),
                'tail_visible': bool(sequence.tail_visible[f, b]),
            }
            for b, name in enumerate(sequence.bone_names)
        ])
    return {
        'format_version': POSE_FORMAT_VERSION,
        'label': sequence.label.value,
        'fps': int(sequence.fps),
        'seed': int(sequence.seed),
        'camera': sequence.camera.to_dict(),
        'frames': frames,
    }


def write_pose_file(sequence: PoseSequence, path: Union[str, Path]):
    """Validate ``sequence`` and write it; floats keep their shortest exact repr"""
    document = pose_document(sequence)
    write_json(path, document)
    logger.debug(f"Wrote pose file {path} ({sequence.frame_count} frames)")


def read_pose_file(path: Union[str, Path]) -> PoseSequence:
    path = Path(path)
    with open(path, encoding='utf-8') as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid JSON: {e}")

    try:
        version = document.get('format_version', POSE_FORMAT_VERSION)
        if version != POSE_FORMAT_VERSION:
            raise ValidationError(f"{path}: unsupported pose format version {version}")
        frames = document['frames']
        if not frames:
            raise ValidationError(f"{path}: pose file has no frames")
        bone_names = tuple(record['name'] for record in frames[0])
        for index, frame in enumerate(frames):
            if tuple(record['name'] for record in frame) != bone_names:
                raise ValidationError(f"{path}: frame {index} lists different bones")
        sequence = PoseSequence(
            bone_names=bone_names,
            heads=np.asarray([[r['head'] for r in frame] for frame in frames], dtype=np.float64),
            tails=np.asarray([[r['tail'] for r in frame] for frame in frames], dtype=np.float64),
            label=GaitClass.parse(document['label']),
            fps=int(document['fps']),
            seed=int(document['seed']),
            camera=CameraPose.from_dict(document['camera']),
            head_visible=np.asarray([[r['head_visible'] for r in frame] for frame in frames], dtype=bool),
            tail_visible=np.asarray([[r['tail_visible'] for r in frame] for frame in frames], dtype=bool),
        )
    except (KeyError, TypeError, ValueError, ParameterError) as e:
        raise ValidationError(f"{path}: malformed pose file: {e}")
    sequence.validate()
    return sequence
