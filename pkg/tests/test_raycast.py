import numpy as np
import pytest

from workflow.errors import ParameterError
from workflow.simulator.camera import CameraPose
from workflow.simulator.geometry import Capsule, Sphere
from workflow.simulator.raycast import RAY_EPSILON, body_proxies, compute_visibility, ray_visibility
from workflow.simulator.scene import Occluder

ORIGIN = np.zeros(3)

MARCH_POINTS = 10_000
TANGENCY_BAND = 1e-4


def sphere(center, radius):
    return Occluder('sphere', tuple(center), (radius,))


def box(center, half):
    return Occluder('box', tuple(center), tuple(half))


def test_sphere_between_blocks():
    assert not ray_visibility(ORIGIN, (4.0, 0.0, 0.0), [sphere((2.0, 0.0, 0.0), 0.5)], [])


def test_sphere_behind_target_does_not_block():
    assert ray_visibility(ORIGIN, (4.0, 0.0, 0.0), [sphere((5.0, 0.0, 0.0), 0.5)], [])


def test_sphere_beside_ray_does_not_block():
    assert ray_visibility(ORIGIN, (4.0, 0.0, 0.0), [sphere((2.0, 1.0, 0.0), 0.5)], [])


def test_box_between_blocks():
    assert not ray_visibility(ORIGIN, (0.0, 4.0, 0.0), [box((0.0, 2.0, 0.0), (0.3, 0.3, 0.3))], [])


def test_target_inside_occluder_is_hidden():
    assert not ray_visibility(ORIGIN, (4.0, 0.0, 0.0), [sphere((4.0, 0.0, 0.0), 0.2)], [])


def test_capsule_proxy_blocks():
    proxy = Capsule(a=(2.0, -1.0, 0.0), b=(2.0, 1.0, 0.0), radius=0.1)
    assert not ray_visibility(ORIGIN, (4.0, 0.0, 0.0), [], [proxy])
    assert ray_visibility(ORIGIN, (4.0, 0.0, 0.5), [], [Capsule(a=(2.0, -1.0, 0.0), b=(2.0, 1.0, 0.0),
                                                                   radius=0.1)])


def test_sphere_proxy_blocks():
    assert not ray_visibility(ORIGIN, (4.0, 0.0, 0.0), [], [Sphere((1.0, 0.0, 0.0), 0.2)])


def test_camera_pose_as_origin():
    camera = CameraPose(azimuth_deg=90.0, elevation_deg=0.0, distance_m=4.0, focal_length=800.0,
                        principal_point=(640.0, 360.0), look_at=(0.0, 0.0, 0.4))
    assert ray_visibility(camera, (0.0, 0.0, 0.4), [], [])
    assert not ray_visibility(camera, (0.0, 0.0, 0.4), [sphere((0.0, 2.0, 0.4), 0.3)], [])


def test_zero_length_ray_is_an_error():
    with pytest.raises(ParameterError):
        ray_visibility(ORIGIN, ORIGIN, [], [])


def test_own_bones_do_not_hide_a_joint(topology):
    camera = CameraPose(azimuth_deg=90.0, elevation_deg=10.0, distance_m=4.0, focal_length=800.0,
                        principal_point=(640.0, 360.0))
    positions = topology.rest_positions[None]
    visible = compute_visibility(topology, positions, camera, [], np.zeros((1, 0, 3)))
    # the near-side legs face the camera
    for name in ('paw_fl', 'paw_rl', 'knee_rl', 'head_tip'):
        assert visible[0, topology.index(name)]


def test_far_side_joints_are_hidden_by_the_body(topology):
    camera = CameraPose(azimuth_deg=90.0, elevation_deg=0.0, distance_m=4.0, focal_length=800.0,
                        principal_point=(640.0, 360.0), look_at=(0.0, 0.0, 0.55))
    positions = topology.rest_positions[None]
    visible = compute_visibility(topology, positions, camera, [], np.zeros((1, 0, 3)))
    # the right hip sits directly behind the left hip from the left flank
    assert not visible[0, topology.index('hip_rr')]
    assert visible[0, topology.index('hip_rl')]


def test_body_proxies_one_per_bone(topology):
    proxies = body_proxies(topology, topology.rest_positions)
    assert len(proxies) == len(topology.edges)
    assert [p.bone for p in proxies] == list(range(len(topology.edges)))


def test_moving_occluder_hides_joint_only_while_in_the_way(topology):
    camera = CameraPose(azimuth_deg=90.0, elevation_deg=0.0, distance_m=4.0, focal_length=800.0,
                        principal_point=(640.0, 360.0), look_at=(0.0, 0.0, 0.55))
    positions = np.repeat(topology.rest_positions[None], 2, axis=0)
    blocker = sphere((0.3, 2.0, 0.5), 0.3)
    # frame 0 in front of the shoulders, frame 1 moved far away
    centers = np.array([[[0.3, 2.0, 0.5]], [[-20.0, 2.0, 0.5]]])
    visible = compute_visibility(topology, positions, camera, [blocker], centers)
    shoulder = topology.index('shoulder_fl')
    assert not visible[0, shoulder]
    assert visible[1, shoulder]


def _point_segment_distances(points, a, b):
    a, b = np.asarray(a), np.asarray(b)
    ab = b - a
    t = np.clip((points - a) @ ab / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(points - (a + t[:, None] * ab), axis=1)


def _signed_distances(points, occluders, proxies):
    """Signed distance of every marched point to every shape, shape (shapes, points)"""
    rows = []
    for occluder in occluders:
        center = np.asarray(occluder.center)
        if occluder.shape == 'sphere':
            rows.append(np.linalg.norm(points - center, axis=1) - occluder.size[0])
        else:
            q = np.abs(points - center) - np.asarray(occluder.size)
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
            inside = np.minimum(q.max(axis=1), 0.0)
            rows.append(outside + inside)
    for proxy in proxies:
        rows.append(_point_segment_distances(points, proxy.a, proxy.b) - proxy.radius)
    return np.array(rows).reshape(len(rows), len(points))


def _random_scene(rng):
    occluders = [sphere(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.05, 0.3)) for _ in range(rng.integers(1, 4))]
    occluders += [box(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.05, 0.25, 3)) for _ in range(rng.integers(0, 3))]
    proxies = [Capsule(a=tuple(rng.uniform(-0.5, 0.5, 3)), b=tuple(rng.uniform(-0.5, 0.5, 3)),
                       radius=float(rng.uniform(0.02, 0.1)))
               for _ in range(rng.integers(0, 3))]
    return occluders, proxies


def test_agrees_with_ray_marching_oracle():
    rng = np.random.default_rng(2024)
    t = np.linspace(0.0, 1.0 - RAY_EPSILON, MARCH_POINTS)
    compared = 0
    for _ in range(1000):
        origin = rng.uniform(-0.5, 0.5, 3)
        target = rng.uniform(-0.5, 0.5, 3)
        occluders, proxies = _random_scene(rng)
        points = origin + t[:, None] * (target - origin)
        distances = _signed_distances(points, occluders, proxies)
        closest = distances.min(axis=1)
        if np.any(np.abs(closest) < TANGENCY_BAND):
            continue
        expected = not np.any(distances < 0.0)
        assert ray_visibility(origin, target, occluders, proxies) == expected
        compared += 1
    assert compared > 800
