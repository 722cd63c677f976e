import numpy as np
import pytest
import yaml

from workflow import SimulateStage
from workflow.context import LabConfig, SimulationConfig, WorkflowContext
from workflow.dataset.adjacency import normalize_adjacency
from workflow.dataset.features import GraphSample
from workflow.simulator.pipeline import simulate_sequence
from workflow.simulator.skeleton import build_skeleton


@pytest.fixture(scope="session")
def topology():
    return build_skeleton()


@pytest.fixture(scope="session")
def short_simulation():
    """One second at 10 fps keeps ray casting fast"""
    return SimulationConfig(duration_s=1.0, fps=10)


@pytest.fixture(scope="session")
def healthy_sequence(topology, short_simulation):
    return simulate_sequence(topology, "healthy", (45.0, 90.0), seed=11, config=short_simulation)


@pytest.fixture
def make_samples():
    """Random graph samples on a small path graph"""
    def make(count, n_nodes=3, timestep=2, dim=2, seed=0, labels=None):
        rng = np.random.default_rng(seed)
        path = np.zeros((n_nodes, n_nodes))
        for i in range(n_nodes - 1):
            path[i, i + 1] = path[i + 1, i] = 1.0
        adjacency = normalize_adjacency(path)
        samples = []
        for i in range(count):
            label = int(labels[i]) if labels is not None else i % 2
            features = rng.normal(size=(n_nodes, timestep, dim)) + (0.8 if label else -0.8)
            samples.append(GraphSample(
                features=features, adjacency=adjacency, label=label,
                mask=np.ones((n_nodes, timestep), dtype=bool),
                source_video=f"video_{i:02d}", window_start=0,
            ))
        return samples
    return make


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML config into tmp_path and return its path"""
    def write(values, name="config.yaml"):
        path = tmp_path / name
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(values, f)
        return path
    return write


def finite_difference(f, array, h=1e-5):
    """Central differences of scalar ``f()`` with respect to every entry of ``array``, in place"""
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        original = array[index]
        array[index] = original + h
        plus = f()
        array[index] = original - h
        minus = f()
        array[index] = original
        grad[index] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic, numeric):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    denominator = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / denominator)) if analytic.size else 0.0


TINY_LAB = {
    'master_seed': 3,
    'videos_per_class': 4,
    'k_folds': 2,
    'validation_fraction': 0.5,
    'duration_s': 1.0,
    'fps': 10,
    'angle_groups': [[45, 90]],
    'timesteps': [5],
    'dimensionalities': ["2D", "3D"],
    'hidden_size': 4,
    'max_epochs': 3,
    'patience': 1,
}


@pytest.fixture(scope="session")
def tiny_config():
    """Smallest lab that still has two folds with both classes in every split"""
    return LabConfig.from_mapping(TINY_LAB)


@pytest.fixture(scope="session")
def tiny_pose_dir(tmp_path_factory, tiny_config):
    output_dir = tmp_path_factory.mktemp("poses")
    stage = SimulateStage("simulate", WorkflowContext(output_dir, config=tiny_config))
    assert stage.execute(), stage.error
    return output_dir
