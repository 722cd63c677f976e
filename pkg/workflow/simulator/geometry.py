#!/usr/bin/env python3
"""Ray and proximity tests for spheres, axis-aligned boxes and capsules.

Rays are parametrised as ``origin + t * direction`` with ``direction`` equal
to ``target - origin``, so ``t = 1`` lands on the target.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Sphere:
    center: Tuple[float, float, float]
    radius: float


@dataclass(frozen=True)
class Capsule:
    a: Tuple[float, float, float]
    b: Tuple[float, float, float]
    radius: float
    bone: int = -1


def ray_sphere_interval(origin, direction, center, radius) -> Optional[Tuple[float, float]]:
    """Parameter interval where the ray is strictly inside the sphere"""
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    m = origin - np.asarray(center, dtype=np.float64)
    a = direction @ direction
    half_b = m @ direction
    c = m @ m - radius * radius
    discriminant = half_b * half_b - a * c
    if discriminant <= 0.0:
        return None
    root = np.sqrt(discriminant)
    return float((-half_b - root) / a), float((-half_b + root) / a)


def ray_box_interval(origin, direction, lo, hi) -> Optional[Tuple[float, float]]:
    """Slab test; parameter interval where the ray is strictly inside the box"""
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    t_enter, t_exit = -np.inf, np.inf
    for axis in range(3):
        if direction[axis] == 0.0:
            if not lo[axis] < origin[axis] < hi[axis]:
                return None
            continue
        t0 = (lo[axis] - origin[axis]) / direction[axis]
        t1 = (hi[axis] - origin[axis]) / direction[axis]
        if t0 > t1:
            t0, t1 = t1, t0
        t_enter = max(t_enter, t0)
        t_exit = min(t_exit, t1)
    if t_enter >= t_exit:
        return None
    return float(t_enter), float(t_exit)


def segment_segment_distances(p0, p1, q0, q1) -> np.ndarray:
    """Closest distances between segment ``p0p1`` and each segment ``q0[k]q1[k]``.

    ``p0``/``p1`` have shape (3,), ``q0``/``q1`` shape (K, 3). The segment
    ``p0p1`` must have non-zero length.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    q0 = np.atleast_2d(np.asarray(q0, dtype=np.float64))
    q1 = np.atleast_2d(np.asarray(q1, dtype=np.float64))
    d1 = np.asarray(p1, dtype=np.float64) - p0
    d2 = q1 - q0
    r = p0 - q0

    a = d1 @ d1
    e = np.einsum('ij,ij->i', d2, d2)
    f = np.einsum('ij,ij->i', d2, r)
    c = r @ d1
    b = d2 @ d1

    degenerate = e <= 1e-300
    safe_e = np.where(degenerate, 1.0, e)
    denom = a * e - b * b

    # near-parallel segments fall back to s = 0
    general = denom > 1e-14 * a * e
    s = np.where(general, np.clip((b * f - c * e) / np.where(general, denom, 1.0), 0.0, 1.0), 0.0)
    t = (b * s + f) / safe_e

    below = t < 0.0
    above = t > 1.0
    s = np.where(below, np.clip(-c / a, 0.0, 1.0), s)
    s = np.where(above, np.clip((b - c) / a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)

    # point-like capsule axes
    s = np.where(degenerate, np.clip(-c / a, 0.0, 1.0), s)
    t = np.where(degenerate, 0.0, t)

    closest_p = p0 + s[:, None] * d1
    closest_q = q0 + t[:, None] * d2
    return np.linalg.norm(closest_p - closest_q, axis=1)


def sphere_box_gap(center, radius, lo, hi) -> float:
    """Distance between sphere surface and box; <= 0 when they touch or overlap"""
    center = np.asarray(center, dtype=np.float64)
    closest = np.clip(center, lo, hi)
    return float(np.linalg.norm(center - closest) - radius)


def box_box_gap(lo_a, hi_a, lo_b, hi_b) -> float:
    """Largest per-axis separation; <= 0 when the boxes touch or overlap"""
    lo_a, hi_a = np.asarray(lo_a, dtype=np.float64), np.asarray(hi_a, dtype=np.float64)
    lo_b, hi_b = np.asarray(lo_b, dtype=np.float64), np.asarray(hi_b, dtype=np.float64)
    gaps = np.maximum(lo_b - hi_a, lo_a - hi_b)
    return float(np.max(gaps))
