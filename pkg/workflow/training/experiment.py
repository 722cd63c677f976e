#!/usr/bin/env python3
"""Experiment grid: angle group x timestep x dimensionality x fold.

Every grid cell trains a freshly initialized model on the fold's training
videos, early-stops on the validation videos and scores AUROC on the test
videos. Cells are independent and may run in worker processes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from utils import derive_seed
from workflow.context import DIMENSIONALITIES, ExperimentConfig
from workflow.errors import ConfigError, MetricError, ProtocolError
from workflow.dataset.adjacency import build_normalized_adjacency
from workflow.dataset.cache import load_samples, save_samples
from workflow.dataset.features import build_video_samples
from workflow.dataset.loading import load_group
from workflow.dataset.splits import stratified_kfold, with_validation
from workflow.dataset.windows import overlap_for
from workflow.model.checkpoint import save_checkpoint
from workflow.model.network import init_params, predict_logits
from workflow.reporting.metrics import FoldResult, auroc
from workflow.simulator.skeleton import build_skeleton, load_skeleton_file
from workflow.training.trainer import train_model

logger = logging.getLogger('gaitlab.training.experiment')

Group = Tuple[float, float]


@dataclass(frozen=True)
class GridJob:
    group: Group
    timestep: int
    dimensionality: str
    fold_index: int
    config: ExperimentConfig
    pose_dir: str
    skeleton_file: Optional[str] = None
    checkpoint_dir: Optional[str] = None
    cache_dir: Optional[str] = None

    @property
    def file_stem(self) -> str:
        return (f"group_{self.group[0]:g}-{self.group[1]:g}_T{self.timestep}_"
                f"{self.dimensionality}_fold{self.fold_index}")

    @property
    def label(self) -> str:
        return (f"group {self.group[0]:g}-{self.group[1]:g} T={self.timestep} "
                f"{self.dimensionality} fold {self.fold_index}")


@dataclass(frozen=True)
class GridSubset:
    """Restriction of the grid, parsed from ``groups=45-90,90-135;timesteps=30,5;dims=2D,3D``"""
    groups: Optional[Tuple[Group, ...]] = None
    timesteps: Optional[Tuple[int, ...]] = None
    dimensionalities: Optional[Tuple[str, ...]] = None

    @classmethod
    def parse(cls, text: Optional[str]) -> 'GridSubset':
        if not text:
            return cls()
        parts: Dict[str, str] = {}
        for chunk in text.split(';'):
            if not chunk.strip():
                continue
            name, sep, value = chunk.partition('=')
            name = name.strip().lower()
            if not sep or name not in ('groups', 'timesteps', 'dims'):
                raise ConfigError('grid-subset', f"expected groups=, timesteps= or dims=, got {chunk!r}")
            parts[name] = value
        try:
            groups = tuple(_parse_group(g) for g in parts['groups'].split(',')) if 'groups' in parts else None
            timesteps = tuple(int(t) for t in parts['timesteps'].split(',')) if 'timesteps' in parts else None
        except ValueError as e:
            raise ConfigError('grid-subset', f"invalid value: {e}")
        dims = tuple(d.strip().upper() for d in parts['dims'].split(',')) if 'dims' in parts else None
        if dims and any(d not in DIMENSIONALITIES for d in dims):
            raise ConfigError('grid-subset', f"dims must be among {list(DIMENSIONALITIES)}")
        return cls(groups, timesteps, dims)

    def apply(self, config: ExperimentConfig) -> ExperimentConfig:
        def restrict(selected, available, name):
            if selected is None:
                return available
            unknown = [s for s in selected if s not in available]
            if unknown:
                raise ConfigError('grid-subset', f"{name} not in config: {unknown}")
            return tuple(s for s in available if s in selected)

        return replace(
            config,
            angle_groups=restrict(self.groups, config.angle_groups, 'groups'),
            timesteps=restrict(self.timesteps, config.timesteps, 'timesteps'),
            dimensionalities=restrict(self.dimensionalities, config.dimensionalities, 'dims'),
        )


def _parse_group(text: str) -> Group:
    lo, sep, hi = text.strip().partition('-')
    if not sep:
        raise ValueError(f"angle group {text!r} must look like lo-hi")
    return float(lo), float(hi)


def plan_jobs(config: ExperimentConfig, pose_dir, skeleton_file: Optional[str] = None,
              checkpoint_dir: Optional[str] = None, cache_dir: Optional[str] = None) -> List[GridJob]:
    return [
        GridJob(tuple(group), timestep, dim, fold, config, str(pose_dir), skeleton_file, checkpoint_dir, cache_dir)
        for group in config.angle_groups
        for timestep in config.timesteps
        for dim in config.dimensionalities
        for fold in range(config.k_folds)
    ]


@lru_cache(maxsize=4)
def _load_group_cached(pose_dir: str, group: Group, fps: int, duration_s: float):
    return tuple(load_group(pose_dir, group, fps, duration_s))


@lru_cache(maxsize=4)
def _topology(skeleton_file: Optional[str]):
    return load_skeleton_file(skeleton_file) if skeleton_file else build_skeleton()


def run_grid_job(job: GridJob) -> FoldResult:
    """Train and score one grid cell"""
    config = job.config
    videos = dict(_load_group_cached(job.pose_dir, job.group, config.fps, config.duration_s))
    labels = {video: sequence.label.label for video, sequence in videos.items()}
    names = sorted(videos)

    folds = stratified_kfold(names, [labels[v] for v in names], config.k_folds,
                             derive_seed(config.master_seed, "folds"))
    fold = with_validation(folds[job.fold_index], labels, config.validation_fraction,
                           derive_seed(config.master_seed, "validation"))

    topology = _topology(job.skeleton_file)
    adjacency = build_normalized_adjacency(topology)
    endpoints = topology.joint_endpoints()

    def samples_for(video_ids: Sequence[str], split: str):
        cache_path = Path(job.cache_dir) / f"{job.file_stem}_{split}.npz" if job.cache_dir else None
        if cache_path is not None and cache_path.exists():
            logger.debug(f"{job.label}: {split} samples from {cache_path}")
            return load_samples(cache_path)
        samples = []
        for video in video_ids:
            samples.extend(build_video_samples(videos[video], topology, job.timestep, job.dimensionality,
                                               adjacency, video, endpoints))
        if cache_path is not None and samples:
            save_samples(cache_path, samples)
        return samples

    train = samples_for(fold.train_videos, "train")
    validation = samples_for(fold.validation_videos, "validation")
    test = samples_for(fold.test_videos, "test")
    check_leakage(train, validation, test)

    input_dim = 3 if job.dimensionality == "3D" else 2
    params = init_params(input_dim, config.hidden_size, derive_seed(config.master_seed, "init"))
    best, log = train_model(train, validation, config.train, params)

    scores = predict_logits(best, test)
    try:
        score = auroc(scores, [s.label for s in test])
    except MetricError as e:
        logger.warning(f"{job.label}: AUROC undefined ({e})")
        score = None

    result = FoldResult(
        angle_lo=float(job.group[0]), angle_hi=float(job.group[1]), timestep=job.timestep,
        overlap=overlap_for(job.timestep), dimensionality=job.dimensionality, fold=job.fold_index,
        auroc=score, epochs_run=log.epochs_run, best_epoch=log.best_epoch, training_log=log,
    )
    if job.checkpoint_dir:
        path = Path(job.checkpoint_dir) / f"{result.file_stem}.json"
        save_checkpoint(path, best, metadata={'auroc': score, 'best_epoch': log.best_epoch,
                                              'validation_loss': log.best_validation_loss})
    auroc_text = "n/a" if score is None else f"{score:.3f}"
    logger.info(f"{job.label}: AUROC {auroc_text} after {log.epochs_run} epochs (best {log.best_epoch})")
    return result


def check_leakage(train: Sequence, validation: Sequence, test: Sequence):
    """No video may contribute samples to more than one split"""
    train_videos = {s.source_video for s in train}
    validation_videos = {s.source_video for s in validation}
    test_videos = {s.source_video for s in test}
    leaked = (train_videos & validation_videos) | (train_videos & test_videos) | (validation_videos & test_videos)
    if leaked:
        raise ProtocolError(f"videos leaked across splits: {sorted(leaked)}")


def run_experiment(config: ExperimentConfig, pose_dir, subset: Optional[GridSubset] = None,
                   skeleton_file: Optional[str] = None, checkpoint_dir=None,
                   cache_dir=None) -> List[FoldResult]:
    """Run every grid cell and return fold results sorted by cell and fold"""
    if subset is not None:
        config = subset.apply(config)
    if config.save_checkpoints and checkpoint_dir is None:
        raise ConfigError('save_checkpoints', "needs an output directory for checkpoints")
    if config.cache_samples and cache_dir is None:
        raise ConfigError('cache_samples', "needs an output directory for the sample cache")
    checkpoint_dir = str(checkpoint_dir) if config.save_checkpoints else None
    cache_dir = str(cache_dir) if config.cache_samples else None

    # fail early on missing groups
    for group in config.angle_groups:
        _load_group_cached(str(pose_dir), tuple(group), config.fps, config.duration_s)

    jobs = plan_jobs(config, pose_dir, skeleton_file, checkpoint_dir, cache_dir)
    logger.info(f"Running {len(jobs)} grid jobs with {config.jobs} worker(s)")
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run_grid_job, jobs))
    else:
        results = [run_grid_job(job) for job in jobs]
    return sorted(results, key=lambda r: r.sort_key)
