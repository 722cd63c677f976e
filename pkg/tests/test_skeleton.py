import numpy as np
import pytest
import yaml

from workflow.errors import TopologyError, ValidationError
from workflow.simulator.skeleton import build_skeleton, load_skeleton_file


def test_default_skeleton_is_a_tree(topology):
    assert topology.n_joints == 19
    assert len(topology.edges) == 18
    assert topology.joints[0] == 'spine_rear'
    # edges point away from the root
    parents = topology.parents()
    assert parents[0] == -1
    assert all(parents[b] == a for a, b in topology.edges)


def test_affected_joint_is_the_rear_left_hip(topology):
    affected = [topology.joints[i] for i in topology.affected_with_descendants()]
    assert affected == ['hip_rl', 'knee_rl', 'ankle_rl', 'paw_rl']


def test_joint_endpoints_cover_every_joint(topology):
    endpoints = topology.joint_endpoints()
    assert len(endpoints) == topology.n_joints
    for joint, (bone, end) in enumerate(endpoints):
        a, b = topology.edges[bone]
        assert (a if end == 'head' else b) == joint
    # paws and head tip are leaves, read from bone tails
    for name in ('paw_fl', 'paw_rr', 'head_tip'):
        assert endpoints[topology.index(name)][1] == 'tail'


def test_adjacency_matrix_is_symmetric_without_loops(topology):
    adjacency = topology.adjacency_matrix()
    np.testing.assert_array_equal(adjacency, adjacency.T)
    assert np.all(np.diag(adjacency) == 0)
    assert adjacency.sum() == 2 * len(topology.edges)


def test_limb_depths(topology):
    depths = topology.limb_depths()
    assert depths[topology.index('spine_front')] == -1
    assert depths[topology.index('hip_rl')] == 0
    assert depths[topology.index('paw_rl')] == 3


def test_custom_skeleton_orients_edges_from_joint_zero():
    skeleton = build_skeleton({
        'joints': ['root', 'a', 'b'],
        'edges': [['a', 'root'], ['b', 'a']],
        'affected_joints': ['b'],
    })
    assert skeleton.edges == ((0, 1), (1, 2))
    assert skeleton.affected_joints == (2,)


@pytest.mark.parametrize("config, error", [
    ({'joints': ['a', 'b', 'c'], 'edges': [['a', 'b'], ['b', 'c'], ['c', 'a']], 'affected_joints': ['a']},
     TopologyError),
    ({'joints': ['a', 'b', 'c', 'd'], 'edges': [['a', 'b'], ['c', 'd']], 'affected_joints': ['a']},
     TopologyError),
    ({'joints': ['a', 'b'], 'edges': [['a', 'a']], 'affected_joints': ['a']}, TopologyError),
    ({'joints': ['a', 'b'], 'edges': [['a', 'x']], 'affected_joints': ['a']}, TopologyError),
    ({'joints': ['a', 'a'], 'edges': [[0, 1]], 'affected_joints': ['a']}, ValidationError),
    ({'joints': ['a', 'b'], 'edges': [['a', 'b']], 'affected_joints': []}, ValidationError),
    ({'joints': ['a', 'b'], 'edges': [['a', 'b']], 'affected_joints': ['z']}, ValidationError),
])
def test_invalid_skeletons_are_rejected(config, error):
    with pytest.raises(error):
        build_skeleton(config)


def test_cycle_error_mentions_cycle():
    with pytest.raises(TopologyError, match="cycle"):
        build_skeleton({'joints': ['a', 'b', 'c'],
                        'edges': [['a', 'b'], ['b', 'c'], ['c', 'a']],
                        'affected_joints': ['a']})


def test_load_skeleton_file(tmp_path):
    path = tmp_path / "skeleton.yaml"
    path.write_text(yaml.safe_dump({
        'joints': [{'name': 'root', 'rest': [0, 0, 0.5]},
                   {'name': 'leg', 'rest': [0, 0, 0.2], 'limb_phase': 0.25},
                   {'name': 'paw', 'rest': [0, 0, 0.0], 'limb_phase': 0.25}],
        'edges': [['root', 'leg'], ['leg', 'paw']],
        'affected_joints': ['leg'],
        'bone_radius': 0.03,
    }))
    skeleton = load_skeleton_file(path)
    assert skeleton.joints == ('root', 'leg', 'paw')
    assert skeleton.bone_radii == (0.03, 0.03)
    assert skeleton.limb_phases == (None, 0.25, 0.25)


def test_skeleton_file_must_hold_a_mapping(tmp_path):
    path = tmp_path / "skeleton.yaml"
    path.write_text("- just\n- a list\n")
    with pytest.raises(ValidationError):
        load_skeleton_file(path)
