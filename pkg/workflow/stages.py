#!/usr/bin/env python3

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

from utils import derive_seed
from workflow import __version__
from workflow.base import WorkflowStage
from workflow.context import SimulationConfig
from workflow.dataset.loading import pose_path
from workflow.manifest import RunManifest, verify_if_present
from workflow.reporting.report import emit_report
from workflow.reporting.tables import read_results_csv, write_results_csv, write_training_logs
from workflow.simulator.gait import GaitClass
from workflow.simulator.pipeline import simulate_sequence
from workflow.simulator.pose_file import write_pose_file
from workflow.simulator.skeleton import build_skeleton, load_skeleton_file
from workflow.training.experiment import GridSubset, run_experiment

logger = logging.getLogger('gaitlab.stages')

GAIT_CLASSES = (GaitClass.HEALTHY, GaitClass.UNHEALTHY)

# group, class, video index, seed, skeleton file, simulation config, output path
SimulationTask = Tuple[Tuple[float, float], GaitClass, int, int, Optional[str], SimulationConfig, str]


def _simulate_one(task: SimulationTask) -> str:
    group, gait_class, _, seed, skeleton_file, config, path = task
    topology = load_skeleton_file(skeleton_file) if skeleton_file else build_skeleton()
    sequence = simulate_sequence(topology, gait_class, group, seed, config)
    write_pose_file(sequence, path)
    return path


def _resolve(context, relative: Optional[str]) -> Optional[str]:
    if relative is None:
        return None
    path = Path(relative)
    return str(path if path.is_absolute() else context.config_dir / path)


class SimulateStage(WorkflowStage):
    """Generates the pose files of every angle group"""

    def plan(self) -> List[SimulationTask]:
        config = self.context.config
        simulation = config.simulation_config()
        skeleton_file = _resolve(self.context, config.skeleton_file)
        tasks = []
        for group_index, group in enumerate(config.angle_groups):
            for class_index, gait_class in enumerate(GAIT_CLASSES):
                for video_index in range(config.videos_per_class):
                    seed = derive_seed(config.master_seed, "simulate", group_index, class_index, video_index)
                    path = pose_path(self.context.output_dir, group, gait_class, video_index)
                    tasks.append((tuple(group), gait_class, video_index, seed, skeleton_file, simulation, str(path)))
        return tasks

    def _do_execute(self) -> bool:
        config = self.context.config
        # validate a custom skeleton before spawning work
        skeleton_file = _resolve(self.context, config.skeleton_file)
        if skeleton_file:
            load_skeleton_file(skeleton_file)

        tasks = self.plan()
        self.logger.info(f"Simulating {len(tasks)} videos over {len(config.angle_groups)} angle groups")
        if config.jobs > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                written = list(pool.map(_simulate_one, tasks))
        else:
            written = [_simulate_one(task) for task in tasks]

        manifest = RunManifest(stage=self.name, config=config.snapshot(), master_seed=config.master_seed,
                               tool_version=__version__, outputs={'poses': '.'})
        manifest.record_outputs(self.context.output_dir, written)
        manifest.write(self.context.output_dir)
        return True


class ReportStage(WorkflowStage):
    """Regenerates tables and plot data from a results file"""

    def __init__(self, name: str, context: 'WorkflowContext', results_path: Path):
        super().__init__(name, context)
        self.results_path = Path(results_path)
        self.report: Optional[dict] = None

    def _do_execute(self) -> bool:
        verify_if_present(self.results_path.parent)
        results = read_results_csv(self.results_path)
        self.report = emit_report(results, self.context.output_dir / "report")
        return True


class ExperimentStage(WorkflowStage):
    """Runs the training grid, writes results and the inline report"""

    def __init__(self, name: str, context: 'WorkflowContext', pose_dir: Path, grid_subset: Optional[str] = None):
        super().__init__(name, context)
        self.pose_dir = Path(pose_dir)
        self.grid_subset = grid_subset
        self.results = None

    def _do_execute(self) -> bool:
        config = self.context.config
        output_dir = self.context.output_dir
        verify_if_present(self.pose_dir)

        subset = GridSubset.parse(self.grid_subset)
        self.results = run_experiment(
            config.experiment_config(), self.pose_dir, subset=subset,
            skeleton_file=_resolve(self.context, config.skeleton_file),
            checkpoint_dir=output_dir / "checkpoints", cache_dir=output_dir / "sample_cache",
        )
        results_path = output_dir / "results.csv"
        write_results_csv(results_path, self.results)
        write_training_logs(output_dir / "training_logs", self.results)

        # tables come from the re-read file, as in the report command
        report = emit_report(read_results_csv(results_path), output_dir / "report")

        written = [results_path] + list(report["written"])
        written += [output_dir / "training_logs" / f"{r.file_stem}.csv" for r in self.results]
        if config.save_checkpoints:
            written += [output_dir / "checkpoints" / f"{r.file_stem}.json" for r in self.results]
        manifest = RunManifest(stage=self.name, config=config.snapshot(), master_seed=config.master_seed,
                               tool_version=__version__,
                               outputs={'results': 'results.csv', 'report': 'report', 'training_logs': 'training_logs'})
        manifest.record_outputs(output_dir, written)
        manifest.write(output_dir)
        return True
