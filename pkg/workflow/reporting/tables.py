#!/usr/bin/env python3
"""Result files and report steps.

Report steps share the ``(aggregates, report) -> (aggregates, report)``
signature of the workflow step registry: ``aggregates`` is the list of
ExperimentResult cells and ``report`` carries the output directory and the
paths written so far.
"""

import re
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import pandas as pd

from utils import write_text
from workflow.errors import ResultsParseError
from workflow.reporting.metrics import (
    MISSING,
    ExperimentResult,
    FoldResult,
    aggregate_folds,
    format_mean_std,
    format_number,
    mean_std,
)

logger = logging.getLogger('gaitlab.reporting.tables')

RESULT_COLUMNS = ['angle_lo', 'angle_hi', 'timestep', 'overlap', 'dimensionality',
                  'fold', 'auroc', 'epochs_run', 'best_epoch']
AGGREGATE_COLUMNS = ['angle_lo', 'angle_hi', 'timestep', 'overlap', 'dimensionality',
                     'folds', 'mean', 'std', 'mean_std']
STD_FOOTNOTE = "± is the population standard deviation across folds."

Report = Dict[str, object]


def _write_frame(frame: pd.DataFrame, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n')


def _angle(value: float) -> str:
    return f"{value:g}"


def _optional(value, fmt: str) -> str:
    return "" if value is None else format(value, fmt)

#
# Fold results
#

def results_frame(fold_results: Sequence) -> pd.DataFrame:
    rows = [
        [_angle(r.angle_lo), _angle(r.angle_hi), str(r.timestep), str(r.overlap), r.dimensionality,
         str(r.fold), _optional(r.auroc, '.6f'), str(r.epochs_run), str(r.best_epoch)]
        for r in sorted(fold_results, key=lambda r: r.sort_key)
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS, dtype=str)


def write_results_csv(path: Union[str, Path], fold_results: Sequence):
    """One row per fold; AUROC with six decimals, empty when undefined"""
    _write_frame(results_frame(fold_results), Path(path))
    logger.info(f"Wrote {len(fold_results)} fold results to {path}")


_PANDAS_LINE = re.compile(r"line (\d+)")


def read_results_csv(path: Union[str, Path]) -> List:
    """Parse a results file back into fold results (without training logs).

    Raises ResultsParseError naming the first bad line, or when the file
    holds no result rows.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=[])
    except pd.errors.EmptyDataError:
        raise ResultsParseError(1, "no results: file is empty")
    except pd.errors.ParserError as e:
        match = _PANDAS_LINE.search(str(e))
        raise ResultsParseError(int(match.group(1)) if match else 0, f"malformed CSV: {e}")

    if list(frame.columns) != RESULT_COLUMNS:
        raise ResultsParseError(1, f"expected header {','.join(RESULT_COLUMNS)}")
    if frame.empty:
        raise ResultsParseError(2, "no results: file has a header but no rows")

    results = []
    for index, row in enumerate(frame.itertuples(index=False)):
        line = index + 2
        values = row._asdict()
        missing = [c for c in RESULT_COLUMNS if c != 'auroc' and (pd.isna(values[c]) or values[c] == '')]
        if missing:
            raise ResultsParseError(line, f"missing value for {missing[0]}")
        try:
            auroc = values['auroc']
            result = FoldResult(
                angle_lo=float(values['angle_lo']), angle_hi=float(values['angle_hi']),
                timestep=int(values['timestep']), overlap=int(values['overlap']),
                dimensionality=values['dimensionality'], fold=int(values['fold']),
                auroc=None if pd.isna(auroc) or auroc == '' else float(auroc),
                epochs_run=int(values['epochs_run']), best_epoch=int(values['best_epoch']),
            )
        except ValueError as e:
            raise ResultsParseError(line, f"invalid value: {e}")
        if result.auroc is not None and not 0.0 <= result.auroc <= 1.0:
            raise ResultsParseError(line, f"AUROC {result.auroc} outside [0, 1]")
        if result.dimensionality not in ("2D", "3D"):
            raise ResultsParseError(line, f"unknown dimensionality {result.dimensionality!r}")
        results.append(result)
    logger.info(f"Read {len(results)} fold results from {path}")
    return results


def write_training_logs(directory: Union[str, Path], fold_results: Sequence):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for result in fold_results:
        if result.training_log is not None:
            result.training_log.write_csv(directory / f"{result.file_stem}.csv")

#
# Report steps
#

def _granularities(aggregates: Sequence[ExperimentResult]) -> List[float]:
    return sorted({a.width for a in aggregates}, reverse=True)


def _groups(aggregates: Sequence[ExperimentResult], width: float) -> List[Tuple[float, float]]:
    return sorted({(a.angle_lo, a.angle_hi) for a in aggregates if a.width == width})


def _markdown(header: List[str], rows: List[List[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def _group_label(group: Tuple[float, float]) -> str:
    return f"{_angle(group[0])} - {_angle(group[1])}"


def _emit(report: Report, path: Path):
    report.setdefault('written', []).append(path)


def aggregate_csv_step(aggregates: List[ExperimentResult], report: Report):
    rows = [
        [_angle(a.angle_lo), _angle(a.angle_hi), str(a.timestep), str(a.overlap), a.dimensionality,
         str(sum(v is not None for v in a.fold_values)), _optional(a.mean, '.3f'), _optional(a.std, '.3f'),
         a.formatted]
        for a in aggregates
    ]
    path = Path(report['output_dir']) / "aggregate.csv"
    _write_frame(pd.DataFrame(rows, columns=AGGREGATE_COLUMNS, dtype=str), path)
    _emit(report, path)
    return aggregates, report


def granularity_tables_step(aggregates: List[ExperimentResult], report: Report):
    """Mean ± std over every fold and timestep per angle group and dimensionality"""
    output_dir = Path(report['output_dir'])
    for width in _granularities(aggregates):
        groups = _groups(aggregates, width)
        dims = sorted({a.dimensionality for a in aggregates if a.width == width})
        rows = []
        for dim in dims:
            row = [dim]
            for group in groups:
                values = [v for a in aggregates
                          if (a.angle_lo, a.angle_hi) == group and a.dimensionality == dim
                          for v in a.fold_values]
                row.append(format_mean_std(*mean_std(values)) if values else MISSING)
            rows.append(row)
        title = f"Average AUROC across all runs, angle groups of {_angle(width)}°"
        content = f"# {title}\n\n" + _markdown(["Dim"] + [_group_label(g) for g in groups], rows)
        content += f"\n{STD_FOOTNOTE}\n"
        path = output_dir / f"groups_{_angle(width)}deg.md"
        write_text(path, content)
        _emit(report, path)
    return aggregates, report


def timestep_tables_step(aggregates: List[ExperimentResult], report: Report):
    """Mean ± std across folds per timestep, overlap and dimensionality"""
    output_dir = Path(report['output_dir'])
    for width in _granularities(aggregates):
        groups = _groups(aggregates, width)
        cells = {(a.angle_lo, a.angle_hi, a.timestep, a.dimensionality): a
                 for a in aggregates if a.width == width}
        keys = sorted({(a.timestep, a.overlap, a.dimensionality) for a in aggregates if a.width == width},
                      key=lambda k: (-k[0], k[2]))
        rows = []
        for timestep, overlap, dim in keys:
            row = [str(timestep), str(overlap), dim]
            for group in groups:
                cell = cells.get((group[0], group[1], timestep, dim))
                row.append(cell.formatted if cell else MISSING)
            rows.append(row)
        title = f"Average AUROC per sample length, angle groups of {_angle(width)}°"
        content = f"# {title}\n\n" + _markdown(["T", "O", "Dim"] + [_group_label(g) for g in groups], rows)
        content += f"\n{STD_FOOTNOTE}\n"
        path = output_dir / f"timesteps_{_angle(width)}deg.md"
        write_text(path, content)
        _emit(report, path)
    return aggregates, report


def plot_data_step(aggregates: List[ExperimentResult], report: Report):
    """AUROC vs angle group and AUROC vs timestep, one row per plotted point"""
    output_dir = Path(report['output_dir'])
    by_group = []
    for width in _granularities(aggregates):
        for group in _groups(aggregates, width):
            for dim in sorted({a.dimensionality for a in aggregates}):
                values = [v for a in aggregates
                          if (a.angle_lo, a.angle_hi) == group and a.dimensionality == dim
                          for v in a.fold_values]
                if not values:
                    continue
                mean, std = mean_std(values)
                by_group.append([_angle(width), _angle(group[0]), _angle(group[1]), dim,
                                 _optional(mean, '.3f'), _optional(std, '.3f')])
    by_timestep = [
        [_angle(a.width), _angle(a.angle_lo), _angle(a.angle_hi), a.dimensionality, str(a.timestep),
         str(a.overlap), _optional(a.mean, '.3f'), _optional(a.std, '.3f')]
        for a in aggregates
    ]
    group_path = output_dir / "plot_auroc_by_group.csv"
    timestep_path = output_dir / "plot_auroc_by_timestep.csv"
    _write_frame(pd.DataFrame(by_group, dtype=str, columns=[
        'granularity', 'angle_lo', 'angle_hi', 'dimensionality', 'mean', 'std']), group_path)
    _write_frame(pd.DataFrame(by_timestep, dtype=str, columns=[
        'granularity', 'angle_lo', 'angle_hi', 'dimensionality', 'timestep', 'overlap', 'mean', 'std']),
        timestep_path)
    _emit(report, group_path)
    _emit(report, timestep_path)
    return aggregates, report


def summarize_findings(aggregates: Sequence[ExperimentResult]) -> dict:
    """Directional checks: 3D beats 2D, the best 3D group and its gap to the worst"""
    def fold_values(dim, group=None):
        return [v for a in aggregates if a.dimensionality == dim
                and (group is None or (a.angle_lo, a.angle_hi) == group) for v in a.fold_values]

    mean_2d, _ = mean_std(fold_values("2D"))
    mean_3d, _ = mean_std(fold_values("3D"))
    group_means = {}
    for group in sorted({(a.angle_lo, a.angle_hi) for a in aggregates if a.dimensionality == "3D"}):
        mean, _ = mean_std(fold_values("3D", group))
        if mean is not None:
            group_means[group] = mean
    findings = {'mean_2d': mean_2d, 'mean_3d': mean_3d, 'best_group': None, 'worst_group': None,
                'best_mean_3d': None, 'worst_mean_3d': None, 'gap_3d': None}
    if group_means:
        best = max(group_means, key=lambda g: (group_means[g], -g[0], -g[1]))
        worst = min(group_means, key=lambda g: (group_means[g], g[0], g[1]))
        findings.update(best_group=best, worst_group=worst, best_mean_3d=group_means[best],
                        worst_mean_3d=group_means[worst], gap_3d=group_means[best] - group_means[worst])
    findings['three_d_beats_two_d'] = (mean_2d is not None and mean_3d is not None and mean_3d > mean_2d)
    findings['best_group_reaches_0_9'] = findings['best_mean_3d'] is not None and findings['best_mean_3d'] >= 0.9
    findings['gap_at_least_0_15'] = findings['gap_3d'] is not None and findings['gap_3d'] >= 0.15
    return findings


def findings_step(aggregates: List[ExperimentResult], report: Report):
    findings = summarize_findings(aggregates)
    report['findings'] = findings

    def group_text(group):
        return "n/a" if group is None else f"{_group_label(group)}°"

    def check(flag):
        return "yes" if flag else "no"

    lines = [
        "# Findings",
        "",
        f"- Mean 2D AUROC: {format_number(findings['mean_2d'])}",
        f"- Mean 3D AUROC: {format_number(findings['mean_3d'])}",
        f"- 3D above 2D: {check(findings['three_d_beats_two_d'])}",
        f"- Best 3D group: {group_text(findings['best_group'])} ({format_number(findings['best_mean_3d'])})",
        f"- Worst 3D group: {group_text(findings['worst_group'])} ({format_number(findings['worst_mean_3d'])})",
        f"- Best 3D group at or above 0.9: {check(findings['best_group_reaches_0_9'])}",
        f"- Gap between best and worst 3D group at least 0.15: {check(findings['gap_at_least_0_15'])}",
        "",
    ]
    path = Path(report['output_dir']) / "findings.md"
    write_text(path, "\n".join(lines))
    _emit(report, path)
    return aggregates, report


def aggregate_results(fold_results: Sequence) -> List[ExperimentResult]:
    if not fold_results:
        raise ResultsParseError(0, "no results to report")
    return aggregate_folds(fold_results)
