#!/usr/bin/env python3

import sys
import logging
import argparse
from pathlib import Path
from typing import List, Optional

from workflow.context import WorkflowContext
from workflow.errors import error_category
from workflow import (
    ExperimentStage,
    ReportStage,
    SimulateStage,
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('gaitlab')


class Workflow:
    """Main workflow orchestrator"""

    def __init__(self, context: WorkflowContext, stages: List):
        self.context = context
        self.stages = stages
        self.failed_stage = None

    @classmethod
    def for_command(cls, args: argparse.Namespace) -> 'Workflow':
        if args.command == 'simulate':
            context = WorkflowContext(Path(args.out), config_path=Path(args.config),
                                      seed=args.seed, jobs=args.jobs)
            return cls(context, [SimulateStage("simulate", context)])
        if args.command == 'experiment':
            context = WorkflowContext(Path(args.out), config_path=Path(args.config),
                                      seed=args.seed, jobs=args.jobs)
            return cls(context, [ExperimentStage("experiment", context, Path(args.poses), args.grid_subset)])
        context = WorkflowContext(Path(args.out))
        return cls(context, [ReportStage("report", context, Path(args.results))])

    def run(self) -> bool:
        """Run every stage in order, stopping at the first failure"""
        for stage in self.stages:
            if not stage.execute():
                self.failed_stage = stage
                return False
        return True

    @property
    def error(self) -> Optional[BaseException]:
        return self.failed_stage.error if self.failed_stage else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Simulate quadruped gait videos and classify them by camera angle')
    parser.add_argument('--debug', action='store_true',
                        help='Enable debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help='Generate pose files for every angle group')
    simulate.add_argument('--config', default='config.yaml', help='Lab configuration file')
    simulate.add_argument('--out', required=True, help='Directory for pose files and the manifest')
    simulate.add_argument('--seed', type=int, help='Override master_seed')
    simulate.add_argument('--jobs', type=int, help='Number of worker processes')

    experiment = commands.add_parser('experiment', help='Train and score the experiment grid')
    experiment.add_argument('--config', default='config.yaml', help='Lab configuration file')
    experiment.add_argument('--poses', required=True, help='Directory written by simulate')
    experiment.add_argument('--out', required=True, help='Directory for results and the report')
    experiment.add_argument('--seed', type=int, help='Override master_seed')
    experiment.add_argument('--jobs', type=int, help='Number of concurrent grid cells')
    experiment.add_argument('--grid-subset',
                            help='Restrict the grid, e.g. "groups=45-90;timesteps=30,5;dims=2D,3D"')

    report = commands.add_parser('report', help='Regenerate tables from a results file')
    report.add_argument('--results', required=True, help='results.csv written by experiment')
    report.add_argument('--out', required=True, help='Directory for the regenerated report')
    return parser


def fail(error: BaseException) -> int:
    message = str(error).replace('\n', ' ') or type(error).__name__
    print(f"error[{error_category(error)}]: {message}", file=sys.stderr)
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.debug:
        logger.setLevel(logging.DEBUG)

    try:
        workflow = Workflow.for_command(args)
    except Exception as e:
        logger.debug("Could not set up the workflow", exc_info=True)
        return fail(e)

    if workflow.run():
        return 0
    return fail(workflow.error or RuntimeError(f"stage {workflow.failed_stage.name} failed"))


if __name__ == "__main__":
    sys.exit(main())
