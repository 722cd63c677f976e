import json

import pytest
import yaml

from conftest import TINY_LAB
from main import main


def error_line(capsys):
    """The single failure line the command prints to stderr"""
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("error[")]
    assert len(lines) == 1
    return lines[0]


@pytest.fixture(scope="module")
def lab(tmp_path_factory):
    """Config, pose directory and one experiment run produced through the command line"""
    root = tmp_path_factory.mktemp("lab")
    config = root / "lab.yaml"
    config.write_text(yaml.safe_dump(TINY_LAB), encoding='utf-8')
    assert main(["simulate", "--config", str(config), "--out", str(root / "poses")]) == 0
    assert main(["experiment", "--config", str(config), "--poses", str(root / "poses"),
                 "--out", str(root / "run")]) == 0
    return root


def test_simulate_writes_every_video(lab):
    files = sorted(p.name for p in (lab / "poses" / "group_45-90").glob("*.json"))
    assert files == [f"{c}_{i:02d}.json" for c in ("healthy", "unhealthy") for i in range(4)]
    manifest = json.loads((lab / "poses" / "manifest.json").read_text(encoding='utf-8'))
    assert manifest['stage'] == "simulate"
    assert len(manifest['hashes']) == 8
    assert (lab / "poses" / "config.yaml").exists()


def test_simulate_is_reproducible(lab):
    config = lab / "lab.yaml"
    assert main(["simulate", "--config", str(config), "--out", str(lab / "poses-again")]) == 0
    for path in sorted((lab / "poses" / "group_45-90").glob("*.json")):
        assert path.read_bytes() == (lab / "poses-again" / "group_45-90" / path.name).read_bytes()


def test_experiment_outputs(lab):
    run = lab / "run"
    lines = (run / "results.csv").read_text(encoding='utf-8').splitlines()
    assert lines[0] == "angle_lo,angle_hi,timestep,overlap,dimensionality,fold,auroc,epochs_run,best_epoch"
    assert len(lines) == 5
    assert len(list((run / "training_logs").glob("*.csv"))) == 4
    assert (run / "report" / "groups_45deg.md").exists()
    assert (run / "report" / "findings.md").exists()
    assert not (run / "checkpoints").exists()


def test_experiment_is_reproducible(lab):
    assert main(["experiment", "--config", str(lab / "lab.yaml"), "--poses", str(lab / "poses"),
                 "--out", str(lab / "rerun"), "--jobs", "2"]) == 0
    assert (lab / "run" / "results.csv").read_bytes() == (lab / "rerun" / "results.csv").read_bytes()


def test_grid_subset(lab):
    assert main(["experiment", "--config", str(lab / "lab.yaml"), "--poses", str(lab / "poses"),
                 "--out", str(lab / "subset"), "--grid-subset", "dims=3D"]) == 0
    lines = (lab / "subset" / "results.csv").read_text(encoding='utf-8').splitlines()
    assert len(lines) == 3
    assert all(",3D," in line for line in lines[1:])


def test_report_regenerates_tables(lab):
    assert main(["report", "--results", str(lab / "run" / "results.csv"), "--out", str(lab / "tables")]) == 0
    for path in sorted((lab / "run" / "report").iterdir()):
        assert path.read_bytes() == (lab / "tables" / "report" / path.name).read_bytes()


def test_unknown_config_key(tmp_path, capsys):
    config = tmp_path / "lab.yaml"
    config.write_text(yaml.safe_dump(dict(TINY_LAB, learning_rte=0.1)), encoding='utf-8')
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "poses")]) == 1
    assert error_line(capsys) == "error[config]: learning_rte: unknown key"


def test_missing_poses(tmp_path, capsys):
    config = tmp_path / "lab.yaml"
    config.write_text(yaml.safe_dump(TINY_LAB), encoding='utf-8')
    assert main(["experiment", "--config", str(config), "--poses", str(tmp_path / "nothing"),
                 "--out", str(tmp_path / "run")]) == 1
    assert error_line(capsys).startswith("error[io]: no pose files for angle group 45-90")


def test_missing_results_file(tmp_path, capsys):
    assert main(["report", "--results", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "out")]) == 1
    assert error_line(capsys).startswith("error[io]: ")


def test_truncated_results_file(tmp_path, capsys):
    results = tmp_path / "results.csv"
    results.write_text("angle_lo,angle_hi,timestep,overlap,dimensionality,fold,auroc,epochs_run,best_epoch\n"
                       "0,90,30,15,3D,0,0.9,10,4\n0,90,30,15,3D,1\n", encoding='utf-8')
    assert main(["report", "--results", str(results), "--out", str(tmp_path / "out")]) == 1
    assert error_line(capsys).startswith("error[parse]: line 3: ")


def test_tampered_results_fail_verification(lab, capsys):
    run = lab / "run"
    tampered = lab / "tampered"
    tampered.mkdir()
    for name in ("results.csv", "manifest.json"):
        (tampered / name).write_bytes((run / name).read_bytes())
    (tampered / "results.csv").write_text((run / "results.csv").read_text(encoding='utf-8') + "\n",
                                          encoding='utf-8')
    assert main(["report", "--results", str(tampered / "results.csv"), "--out", str(lab / "t-out")]) == 1
    assert error_line(capsys).startswith("error[manifest]: ")
