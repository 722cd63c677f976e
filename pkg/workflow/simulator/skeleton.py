#!/usr/bin/env python3
"""Quadruped skeleton topology: joint names, bones, rest pose and limb phases."""

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from workflow.errors import TopologyError, ValidationError

logger = logging.getLogger('gaitlab.simulator.skeleton')

# Leg phase offsets in fractions of the gait cycle, order fl, fr, rl, rr
LEG_PHASES = {'fl': 0.0, 'fr': 0.5, 'rl': 0.25, 'rr': 0.75}

TORSO_RADIUS = 0.08
NECK_RADIUS = 0.05
GIRDLE_RADIUS = 0.04
LEG_RADIUS = 0.035

# name, parent, rest position (x forward, y left, z up; meters), limb phase
_DEFAULT_JOINTS = [
    ('spine_rear', None, (-0.30, 0.00, 0.55), None),
    ('spine_front', 'spine_rear', (0.30, 0.00, 0.57), None),
    ('head_tip', 'spine_front', (0.55, 0.00, 0.80), None),
    ('shoulder_fl', 'spine_front', (0.30, 0.11, 0.50), 'fl'),
    ('elbow_fl', 'shoulder_fl', (0.32, 0.11, 0.33), 'fl'),
    ('wrist_fl', 'elbow_fl', (0.30, 0.11, 0.12), 'fl'),
    ('paw_fl', 'wrist_fl', (0.33, 0.11, 0.00), 'fl'),
    ('shoulder_fr', 'spine_front', (0.30, -0.11, 0.50), 'fr'),
    ('elbow_fr', 'shoulder_fr', (0.32, -0.11, 0.33), 'fr'),
    ('wrist_fr', 'elbow_fr', (0.30, -0.11, 0.12), 'fr'),
    ('paw_fr', 'wrist_fr', (0.33, -0.11, 0.00), 'fr'),
    ('hip_rl', 'spine_rear', (-0.30, 0.11, 0.50), 'rl'),
    ('knee_rl', 'hip_rl', (-0.22, 0.11, 0.33), 'rl'),
    ('ankle_rl', 'knee_rl', (-0.32, 0.11, 0.13), 'rl'),
    ('paw_rl', 'ankle_rl', (-0.29, 0.11, 0.00), 'rl'),
    ('hip_rr', 'spine_rear', (-0.30, -0.11, 0.50), 'rr'),
    ('knee_rr', 'hip_rr', (-0.22, -0.11, 0.33), 'rr'),
    ('ankle_rr', 'knee_rr', (-0.32, -0.11, 0.13), 'rr'),
    ('paw_rr', 'ankle_rr', (-0.29, -0.11, 0.00), 'rr'),
]
DEFAULT_AFFECTED = ('hip_rl',)


@dataclass(frozen=True)
class SkeletonTopology:
    """Validated joint tree rooted at joint 0.

    ``edges`` are bones oriented parent -> child (head -> tail).
    """
    joints: Tuple[str, ...]
    edges: Tuple[Tuple[int, int], ...]
    affected_joints: Tuple[int, ...]
    rest_positions: np.ndarray = field(compare=False, repr=False)
    limb_phases: Tuple[Optional[float], ...] = field(compare=False, repr=False)
    bone_radii: Tuple[float, ...] = field(compare=False, repr=False)

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @property
    def bone_names(self) -> Tuple[str, ...]:
        return tuple(f"{self.joints[a]}-{self.joints[b]}" for a, b in self.edges)

    def index(self, name: str) -> int:
        try:
            return self.joints.index(name)
        except ValueError:
            raise ValidationError(f"unknown joint: {name}")

    def parents(self) -> np.ndarray:
        parents = np.full(self.n_joints, -1, dtype=np.int64)
        for a, b in self.edges:
            parents[b] = a
        return parents

    def children(self, joint: int) -> List[int]:
        return [b for a, b in self.edges if a == joint]

    def descendants(self, joint: int) -> List[int]:
        found, stack = [], [joint]
        while stack:
            for child in self.children(stack.pop()):
                found.append(child)
                stack.append(child)
        return sorted(found)

    def affected_with_descendants(self) -> Tuple[int, ...]:
        marked = set(self.affected_joints)
        for joint in self.affected_joints:
            marked.update(self.descendants(joint))
        return tuple(sorted(marked))

    def limb_depths(self) -> np.ndarray:
        """Depth below the limb root for limb joints, -1 for trunk joints"""
        parents = self.parents()
        depths = np.full(self.n_joints, -1, dtype=np.int64)
        for joint in self._bfs_order():
            if self.limb_phases[joint] is None:
                continue
            parent = parents[joint]
            if parent >= 0 and self.limb_phases[parent] is not None:
                depths[joint] = depths[parent] + 1
            else:
                depths[joint] = 0
        return depths

    def adjacency_matrix(self) -> np.ndarray:
        """Binary symmetric adjacency without self-loops"""
        adjacency = np.zeros((self.n_joints, self.n_joints), dtype=np.float64)
        for a, b in self.edges:
            adjacency[a, b] = adjacency[b, a] = 1.0
        return adjacency

    def joint_endpoints(self) -> List[Tuple[int, str]]:
        """Map every joint to the bone endpoint that carries its position.

        A joint is read from the head of the first bone it starts; leaf joints
        (paw tips, head tip) are read from the tail of the bone ending there.
        """
        mapping = []
        for joint in range(self.n_joints):
            heads = [i for i, (a, _) in enumerate(self.edges) if a == joint]
            if heads:
                mapping.append((heads[0], 'head'))
                continue
            tails = [i for i, (_, b) in enumerate(self.edges) if b == joint]
            mapping.append((tails[0], 'tail'))
        return mapping

    def _bfs_order(self) -> List[int]:
        order, queue = [], deque([0])
        while queue:
            joint = queue.popleft()
            order.append(joint)
            queue.extend(self.children(joint))
        return order


def _default_radius(names: Sequence[str], a: int, b: int, n_trunk: int) -> float:
    if a < n_trunk and b < n_trunk:
        return TORSO_RADIUS if names[b].startswith('spine') else NECK_RADIUS
    if a < n_trunk:
        return GIRDLE_RADIUS
    return LEG_RADIUS


def default_skeleton_config() -> dict:
    joints = []
    for name, _, rest, leg in _DEFAULT_JOINTS:
        joints.append({'name': name, 'rest': list(rest),
                       'limb_phase': None if leg is None else LEG_PHASES[leg]})
    edges = [[parent, name] for name, parent, _, _ in _DEFAULT_JOINTS if parent is not None]
    return {'joints': joints, 'edges': edges, 'affected_joints': list(DEFAULT_AFFECTED)}


def build_skeleton(config: Optional[dict] = None) -> SkeletonTopology:
    """Validate a skeleton configuration, or build the default quadruped.

    ``config`` holds ``joints`` (names, or mappings with ``name``, optional
    ``rest`` and ``limb_phase``), ``edges`` (pairs of names or indices),
    ``affected_joints`` and optional ``bone_radius``. ``None`` or
    ``{'default': True}`` selects the built-in 19-joint skeleton.
    """
    if config is None or config.get('default'):
        config = default_skeleton_config()
        default_radii = True
    else:
        default_radii = False

    raw_joints = config.get('joints') or []
    names, rests, phases = [], [], []
    for entry in raw_joints:
        if isinstance(entry, str):
            entry = {'name': entry}
        names.append(str(entry['name']))
        rests.append(entry.get('rest', [0.0, 0.0, 0.0]))
        phases.append(entry.get('limb_phase'))

    if len(names) < 2:
        raise ValidationError("a skeleton needs at least 2 joints")
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ValidationError(f"duplicate joint names: {duplicates}")

    def resolve(ref: Union[int, str]) -> int:
        if isinstance(ref, str):
            if ref not in names:
                raise TopologyError(f"edge references unknown joint: {ref}")
            return names.index(ref)
        if isinstance(ref, bool) or not isinstance(ref, int) or not 0 <= ref < len(names):
            raise TopologyError(f"edge references invalid joint index: {ref!r}")
        return ref

    pairs = []
    seen = set()
    for edge in config.get('edges') or []:
        if len(edge) != 2:
            raise TopologyError(f"edge must be a pair: {edge!r}")
        a, b = resolve(edge[0]), resolve(edge[1])
        if a == b:
            raise TopologyError(f"self-edge on joint {names[a]}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise TopologyError(f"duplicate edge {names[a]}-{names[b]}")
        seen.add(key)
        pairs.append((a, b))

    edges = _orient_tree(len(names), pairs, names)

    affected_refs = config.get('affected_joints') or []
    if not affected_refs:
        raise ValidationError("affected_joints must not be empty")
    affected = []
    for ref in affected_refs:
        try:
            affected.append(resolve(ref))
        except TopologyError as e:
            raise ValidationError(str(e))
    affected = tuple(sorted(set(affected)))

    rest_positions = np.asarray(rests, dtype=np.float64)
    if rest_positions.shape != (len(names), 3) or not np.all(np.isfinite(rest_positions)):
        raise ValidationError("rest positions must be finite 3D points")

    n_trunk = sum(1 for p in phases if p is None) if default_radii else 0
    if default_radii:
        radii = tuple(_default_radius(names, a, b, n_trunk) for a, b in edges)
    else:
        radius = float(config.get('bone_radius', LEG_RADIUS))
        radii = tuple(radius for _ in edges)

    topology = SkeletonTopology(
        joints=tuple(names),
        edges=edges,
        affected_joints=affected,
        rest_positions=rest_positions,
        limb_phases=tuple(None if p is None else float(p) for p in phases),
        bone_radii=radii,
    )
    logger.debug(f"Built skeleton with {topology.n_joints} joints and {len(edges)} bones")
    return topology


def _orient_tree(n: int, pairs: List[Tuple[int, int]], names: Sequence[str]) -> Tuple[Tuple[int, int], ...]:
    """Check the edge list is a spanning tree and orient it away from joint 0"""
    neighbours: Dict[int, List[int]] = {i: [] for i in range(n)}
    for a, b in pairs:
        neighbours[a].append(b)
        neighbours[b].append(a)

    depth = {0: 0}
    queue = deque([0])
    while queue:
        joint = queue.popleft()
        for other in neighbours[joint]:
            if other not in depth:
                depth[other] = depth[joint] + 1
                queue.append(other)
    if len(depth) != n:
        missing = [names[i] for i in range(n) if i not in depth]
        raise TopologyError(f"edge list is disconnected; unreachable joints: {missing}")
    if len(pairs) != n - 1:
        raise TopologyError(f"edge list contains a cycle ({len(pairs)} edges for {n} joints)")

    return tuple((a, b) if depth[a] < depth[b] else (b, a) for a, b in pairs)


def load_skeleton_file(path: Union[str, Path]) -> SkeletonTopology:
    with open(path, encoding='utf-8') as f:
        config = yaml.safe_load(f)
    if not isinstance(config, dict):
        raise ValidationError(f"skeleton file must hold a mapping: {path}")
    logger.info(f"Loaded skeleton from {path}")
    return build_skeleton(config)
