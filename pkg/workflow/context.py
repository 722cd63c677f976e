#!/usr/bin/env python3

import math
import logging
import shutil
import yaml
from pathlib import Path
from typing import Any, Dict, Optional, Tuple
from dataclasses import dataclass, field, asdict, replace

from workflow.errors import ConfigError

logger = logging.getLogger('gaitlab.context')

DIMENSIONALITIES = ("2D", "3D")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.002
    weight_decay: float = 0.01
    batch_size: int = 8
    max_epochs: int = 30
    patience: int = 6
    betas: Tuple[float, float] = (0.9, 0.999)
    epsilon: float = 1e-8
    min_delta: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        for name in ('learning_rate', 'batch_size', 'max_epochs', 'patience', 'epsilon'):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")
        if self.weight_decay < 0:
            raise ConfigError('weight_decay', "must be non-negative")
        if self.min_delta < 0:
            raise ConfigError('min_delta', "must be non-negative")
        if self.patience >= self.max_epochs:
            raise ConfigError('patience', "must be smaller than max_epochs")
        if not all(0 < b < 1 for b in self.betas):
            raise ConfigError('betas', "must lie in (0, 1)")


@dataclass(frozen=True)
class SimulationConfig:
    duration_s: float = 7.0
    fps: int = 25
    videos_per_class: int = 15
    elevation_range_deg: Tuple[float, float] = (5.0, 25.0)
    distance_range_m: Tuple[float, float] = (3.0, 6.0)
    focal_length: float = 800.0
    principal_point: Tuple[float, float] = (640.0, 360.0)
    look_at_height_m: float = 0.4
    forward_speed_mps: float = 1.0
    occluder_density: float = 0.05
    scene_area_m2: float = 64.0
    gait_period_range_s: Tuple[float, float] = (0.7, 0.9)
    affected_amplitude_scale: float = 0.4
    affected_phase_shift: float = 0.15


@dataclass(frozen=True)
class ExperimentConfig:
    angle_groups: Tuple[Tuple[float, float], ...]
    timesteps: Tuple[int, ...] = (30, 15, 10, 5)
    dimensionalities: Tuple[str, ...] = DIMENSIONALITIES
    k_folds: int = 5
    validation_fraction: float = 0.2
    videos_per_class: int = 15
    duration_s: float = 7.0
    fps: int = 25
    hidden_size: int = 32
    master_seed: int = 0
    jobs: int = 1
    save_checkpoints: bool = False
    cache_samples: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        validate_angle_groups(self.angle_groups)
        if not self.timesteps or any(t < 1 for t in self.timesteps):
            raise ConfigError('timesteps', "must be a non-empty list of positive frame counts")
        if not self.dimensionalities or any(d not in DIMENSIONALITIES for d in self.dimensionalities):
            raise ConfigError('dimensionalities', f"entries must be one of {list(DIMENSIONALITIES)}")
        if self.k_folds < 2:
            raise ConfigError('k_folds', "must be at least 2")
        if not 0 < self.validation_fraction < 1:
            raise ConfigError('validation_fraction', "must lie in (0, 1)")
        if self.hidden_size < 1:
            raise ConfigError('hidden_size', "must be positive")
        if self.jobs < 1:
            raise ConfigError('jobs', "must be positive")


def validate_angle_groups(groups):
    """Groups of equal width must not overlap; every bound lies in [0, 360]"""
    if not groups:
        raise ConfigError('angle_groups', "at least one group is required")
    by_width: Dict[float, list] = {}
    for lo, hi in groups:
        if not 0 <= lo < hi <= 360:
            raise ConfigError('angle_groups', f"invalid interval [{lo}, {hi}]")
        by_width.setdefault(hi - lo, []).append((lo, hi))
    for width, members in by_width.items():
        members = sorted(members)
        for (lo_a, hi_a), (lo_b, hi_b) in zip(members, members[1:]):
            if lo_b < hi_a:
                raise ConfigError('angle_groups', f"[{lo_a}, {hi_a}] overlaps [{lo_b}, {hi_b}]")


# key -> (type, default); tuples are read from YAML lists
_CONFIG_KEYS: Dict[str, Tuple[type, Any]] = {
    'master_seed': (int, 0),
    'duration_s': (float, 7.0),
    'fps': (int, 25),
    'videos_per_class': (int, 15),
    'angle_groups': (list, [[0, 90], [90, 180], [180, 270], [270, 360]]),
    'elevation_range_deg': (list, [5.0, 25.0]),
    'distance_range_m': (list, [3.0, 6.0]),
    'focal_length': (float, 800.0),
    'principal_point': (list, [640.0, 360.0]),
    'look_at_height_m': (float, 0.4),
    'forward_speed_mps': (float, 1.0),
    'occluder_density': (float, 0.05),
    'scene_area_m2': (float, 64.0),
    'gait_period_range_s': (list, [0.7, 0.9]),
    'affected_amplitude_scale': (float, 0.4),
    'affected_phase_shift': (float, 0.15),
    'skeleton_file': (str, None),
    'timesteps': (list, [30, 15, 10, 5]),
    'dimensionalities': (list, ["2D", "3D"]),
    'k_folds': (int, 5),
    'validation_fraction': (float, 0.2),
    'hidden_size': (int, 32),
    'learning_rate': (float, 0.002),
    'weight_decay': (float, 0.01),
    'batch_size': (int, 8),
    'max_epochs': (int, 30),
    'patience': (int, 6),
    'beta1': (float, 0.9),
    'beta2': (float, 0.999),
    'epsilon': (float, 1e-8),
    'min_delta': (float, 1e-6),
    'jobs': (int, 1),
    'save_checkpoints': (bool, False),
    'cache_samples': (bool, False),
}


def _coerce(key: str, value: Any, expected: type) -> Any:
    if value is None:
        if _CONFIG_KEYS[key][1] is None:
            return None
        raise ConfigError(key, "must not be empty")
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected a boolean, got {value!r}")
        return value
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(key, f"expected a finite number, got {value!r}")
        return float(value)
    if expected is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if not isinstance(value, list):
        raise ConfigError(key, f"expected a list, got {value!r}")
    return value


def _pair(key: str, value, positive: bool = False) -> Tuple[float, float]:
    if len(value) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(key, "expected a pair of numbers")
    lo, hi = float(value[0]), float(value[1])
    if lo > hi:
        raise ConfigError(key, "lower bound exceeds upper bound")
    if positive and lo <= 0:
        raise ConfigError(key, "bounds must be positive")
    return lo, hi


@dataclass(frozen=True)
class LabConfig:
    """Flat configuration covering simulation, dataset, model and training"""
    master_seed: int = 0
    duration_s: float = 7.0
    fps: int = 25
    videos_per_class: int = 15
    angle_groups: Tuple[Tuple[float, float], ...] = ((0.0, 90.0), (90.0, 180.0), (180.0, 270.0), (270.0, 360.0))
    elevation_range_deg: Tuple[float, float] = (5.0, 25.0)
    distance_range_m: Tuple[float, float] = (3.0, 6.0)
    focal_length: float = 800.0
    principal_point: Tuple[float, float] = (640.0, 360.0)
    look_at_height_m: float = 0.4
    forward_speed_mps: float = 1.0
    occluder_density: float = 0.05
    scene_area_m2: float = 64.0
    gait_period_range_s: Tuple[float, float] = (0.7, 0.9)
    affected_amplitude_scale: float = 0.4
    affected_phase_shift: float = 0.15
    skeleton_file: Optional[str] = None
    timesteps: Tuple[int, ...] = (30, 15, 10, 5)
    dimensionalities: Tuple[str, ...] = DIMENSIONALITIES
    k_folds: int = 5
    validation_fraction: float = 0.2
    hidden_size: int = 32
    learning_rate: float = 0.002
    weight_decay: float = 0.01
    batch_size: int = 8
    max_epochs: int = 30
    patience: int = 6
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    min_delta: float = 1e-6
    jobs: int = 1
    save_checkpoints: bool = False
    cache_samples: bool = False

    @classmethod
    def from_mapping(cls, raw: Optional[dict]) -> 'LabConfig':
        raw = raw or {}
        if not isinstance(raw, dict):
            raise ConfigError('<root>', "config must be a mapping of keys to values")
        unknown = sorted(set(raw) - set(_CONFIG_KEYS))
        if unknown:
            raise ConfigError(unknown[0], "unknown key")

        values = {}
        for key, (expected, default) in _CONFIG_KEYS.items():
            values[key] = _coerce(key, raw.get(key, default), expected)

        groups = []
        for entry in values['angle_groups']:
            if not isinstance(entry, list):
                raise ConfigError('angle_groups', f"expected [lo, hi] pairs, got {entry!r}")
            groups.append(_pair('angle_groups', entry))
        values['angle_groups'] = tuple(groups)
        values['elevation_range_deg'] = _pair('elevation_range_deg', values['elevation_range_deg'])
        values['distance_range_m'] = _pair('distance_range_m', values['distance_range_m'], positive=True)
        values['principal_point'] = _point('principal_point', values['principal_point'])
        values['gait_period_range_s'] = _pair('gait_period_range_s', values['gait_period_range_s'], positive=True)
        if any(isinstance(t, bool) or not isinstance(t, int) for t in values['timesteps']):
            raise ConfigError('timesteps', "expected a list of integers")
        values['timesteps'] = tuple(values['timesteps'])
        values['dimensionalities'] = tuple(str(d).upper() for d in values['dimensionalities'])

        config = cls(**values)
        config.validate()
        return config

    def validate(self):
        if self.duration_s <= 0:
            raise ConfigError('duration_s', "must be positive")
        if self.fps <= 0:
            raise ConfigError('fps', "must be positive")
        if self.videos_per_class < 1:
            raise ConfigError('videos_per_class', "must be positive")
        if self.focal_length <= 0:
            raise ConfigError('focal_length', "must be positive")
        if self.occluder_density < 0:
            raise ConfigError('occluder_density', "must be non-negative")
        if self.scene_area_m2 <= 0:
            raise ConfigError('scene_area_m2', "must be positive")
        if not 0 < self.affected_amplitude_scale <= 1:
            raise ConfigError('affected_amplitude_scale', "must lie in (0, 1]")
        if self.videos_per_class < self.k_folds:
            raise ConfigError('k_folds', "every class needs at least k_folds videos")
        # derived views carry the remaining checks
        self.train_config()
        self.experiment_config()

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            betas=(self.beta1, self.beta2),
            epsilon=self.epsilon,
            min_delta=self.min_delta,
            seed=self.master_seed,
        )

    def simulation_config(self) -> SimulationConfig:
        return SimulationConfig(
            duration_s=self.duration_s,
            fps=self.fps,
            videos_per_class=self.videos_per_class,
            elevation_range_deg=self.elevation_range_deg,
            distance_range_m=self.distance_range_m,
            focal_length=self.focal_length,
            principal_point=self.principal_point,
            look_at_height_m=self.look_at_height_m,
            forward_speed_mps=self.forward_speed_mps,
            occluder_density=self.occluder_density,
            scene_area_m2=self.scene_area_m2,
            gait_period_range_s=self.gait_period_range_s,
            affected_amplitude_scale=self.affected_amplitude_scale,
            affected_phase_shift=self.affected_phase_shift,
        )

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            angle_groups=self.angle_groups,
            timesteps=self.timesteps,
            dimensionalities=self.dimensionalities,
            k_folds=self.k_folds,
            validation_fraction=self.validation_fraction,
            videos_per_class=self.videos_per_class,
            duration_s=self.duration_s,
            fps=self.fps,
            hidden_size=self.hidden_size,
            master_seed=self.master_seed,
            jobs=self.jobs,
            save_checkpoints=self.save_checkpoints,
            cache_samples=self.cache_samples,
            train=self.train_config(),
        )

    def with_overrides(self, **overrides) -> 'LabConfig':
        overrides = {k: v for k, v in overrides.items() if v is not None}
        config = replace(self, **overrides)
        config.validate()
        return config

    def snapshot(self) -> dict:
        """Plain mapping that reloads into an equal config"""
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = [list(v) if isinstance(v, tuple) else v for v in value]
        return data


def _point(key: str, value) -> Tuple[float, float]:
    if len(value) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(key, "expected a pair of numbers")
    return float(value[0]), float(value[1])


def load_config(path) -> LabConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError('config', f"config file not found: {path}")
    with open(path, encoding='utf-8') as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError('config', f"invalid YAML in {path}: {e}")
    logger.debug(f"Loaded config from {path}")
    return LabConfig.from_mapping(raw)


@dataclass
class WorkflowContext:
    """Maintains the state and configuration of one command invocation"""
    output_dir: Path
    config_path: Optional[Path] = None
    config: Optional[LabConfig] = None
    seed: Optional[int] = None
    jobs: Optional[int] = None

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        if self.config is None and self.config_path is not None:
            self._setup_config()
        if self.config is not None:
            self.config = self.config.with_overrides(master_seed=self.seed, jobs=self.jobs)

    def _setup_config(self):
        """Copy the config file into the output directory and load it"""
        self.config_path = Path(self.config_path)
        self.config = load_config(self.config_path)
        config_dest = self.output_dir / "config.yaml"
        if config_dest.resolve() != self.config_path.resolve():
            shutil.copy2(self.config_path, config_dest)
            logger.info(f"Copied config to output directory: {config_dest}")

    @property
    def config_dir(self) -> Path:
        return self.config_path.parent if self.config_path else Path('.')
