import json

import pytest
from click.testing import CliRunner

from sprcause.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_bounds_prints_value(runner):
    result = runner.invoke(main, ["bounds", "0", "1000", "0.99"])
    assert result.exit_code == 0
    assert result.output.startswith("0.995")


def test_bounds_rejects_bad_query(runner):
    result = runner.invoke(main, ["bounds", "11", "10", "0.9"])
    assert result.exit_code == 1


def test_identify_writes_canonical_json(runner, tmp_path):
    out = tmp_path / "sol.json"
    args = [
        "identify", "--model", "example", "--dist", "example",
        "-N", "60", "--delta", "0", "--beta", "0.99", "--seed", "5",
        "--workers", "1", "--out", str(out),
    ]
    result = runner.invoke(main, args)
    assert result.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["members"] == [["s3"]]
    assert doc["N"] == 60


def test_identify_byte_identical_across_runs_and_workers(runner, tmp_path):
    outs = []
    for name, workers in (("a.json", "1"), ("b.json", "1"), ("c.json", "2")):
        out = tmp_path / name
        result = runner.invoke(main, [
            "identify", "--model", "example", "--dist", "example",
            "-N", "40", "--seed", "9", "--workers", workers, "--out", str(out),
        ])
        assert result.exit_code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_identify_empty_solution_exits_two(runner, tmp_path):
    out = tmp_path / "sol.json"
    result = runner.invoke(main, [
        "identify", "--model", "example", "--dist", "example",
        "-N", "20", "--delta", "0.999", "--seed", "1", "--workers", "1",
        "--out", str(out),
    ])
    assert result.exit_code == 2
    doc = json.loads(out.read_text())
    assert doc["members"] == [] and doc["empty_canonical_samples"] == 20


def test_identify_missing_model_exits_one(runner):
    result = runner.invoke(main, [
        "identify", "--model", "/nonexistent.json", "--dist", "example", "-N", "5",
    ])
    assert result.exit_code == 1


def test_check_reports_branches(runner):
    result = runner.invoke(main, [
        "check", "--model", "example", "--point", "0.3,0.6", "s2", "s3",
    ])
    assert result.exit_code == 0
    assert "is_spr_cause: True" in result.output
    assert "w_c=0.6" in result.output


def test_check_unknown_state_exits_one(runner):
    result = runner.invoke(main, [
        "check", "--model", "example", "--point", "0.3,0.6", "nosuch",
    ])
    assert result.exit_code == 1


def test_check_exact_mode(runner):
    result = runner.invoke(main, [
        "check", "--model", "appendix-e", "--point", "0.5,0.5", "--exact", "s1",
    ])
    assert result.exit_code == 0
    assert "corner" in result.output


def test_validate_csv_deterministic(runner, tmp_path):
    sol = tmp_path / "sol.json"
    runner.invoke(main, [
        "identify", "--model", "appendix-e", "--dist", "appendix-e",
        "-N", "80", "--delta", "0.1", "--seed", "2", "--workers", "1",
        "--out", str(sol),
    ])
    csvs = []
    for name in ("v1.csv", "v2.csv"):
        out = tmp_path / name
        result = runner.invoke(main, [
            "validate", "--model", "appendix-e", "--dist", "appendix-e",
            "--solution", str(sol), "-M", "200", "--seed", "3", "--out", str(out),
        ])
        assert result.exit_code == 0
        csvs.append(out.read_bytes())
    assert csvs[0] == csvs[1]
    header, first = csvs[0].decode().splitlines()[:2]
    assert header == "quantity,estimate,M,half_width,seed"
    assert first.startswith("F['s1']")


def test_validate_repeat_emits_plot_rows(runner, tmp_path):
    sol = tmp_path / "sol.json"
    runner.invoke(main, [
        "identify", "--model", "appendix-e", "--dist", "appendix-e",
        "-N", "50", "--delta", "0.1", "--seed", "2", "--workers", "1",
        "--out", str(sol),
    ])
    out = tmp_path / "plot.csv"
    result = runner.invoke(main, [
        "validate", "--model", "appendix-e", "--dist", "appendix-e",
        "--solution", str(sol), "-M", "100", "--seed", "3", "--repeat", "3",
        "--out", str(out),
    ])
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,quantity,mean,sd"
    assert all(line.split(",")[0] == "50" for line in lines[1:])


def test_gridworld_gen_and_baselines(runner, tmp_path):
    out = tmp_path / "grid.json"
    result = runner.invoke(main, ["gridworld", "gen", "--env", "a", "--out", str(out)])
    assert result.exit_code == 0
    doc = json.loads(out.read_text())
    assert "c4_6" in doc["states"]

    result = runner.invoke(main, [
        "baseline", "na1", "--model", str(out), "--dist", "grid",
    ])
    assert result.exit_code == 0
    assert result.output.strip() == '["c4_6"]'

    result = runner.invoke(main, [
        "baseline", "na2", "--model", "grid-a", "--dist", "grid",
    ])
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert '["c4_6"]' in lines
    assert any("c7_8" in line for line in lines)
