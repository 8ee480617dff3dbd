import csv
import json
import math
import os
import sys
import textwrap

import pytest

from tools import bench_summary
from tools.defer_cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main


def _last_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])

@pytest.fixture
def uniform_out(tmp_path, capsys):
    out = str(tmp_path / "uniform")
    assert main(["run", "-T", "uniform", "-n", "2", "-N", "500", "-o", out, "--no-timing"]) == EXIT_OK
    capsys.readouterr()
    return out


def test_run_writes_results(uniform_out):
    assert sorted(os.listdir(uniform_out)) == ["meta.json", "partitions.jsonl", "timeline.csv"]
    with open(os.path.join(uniform_out, "timeline.csv")) as f:
        rows = list(csv.DictReader(f))
    assert all(float(r["log_z"]) == 0.0 for r in rows)
    assert all(float(r["decision_seconds"]) == 0.0 for r in rows)
    with open(os.path.join(uniform_out, "meta.json")) as f:
        meta = json.load(f)
    assert meta["log_z"] == 0.0
    assert meta["evals"] >= 500 and meta["evals"] == meta["leaves"]
    assert meta["target"] == {"name": "uniform", "dim": 2, "params": {}}
    assert meta["config"]["budget"] == 500

def test_run_summary_line(tmp_path, capsys):
    out = str(tmp_path / "cigar")
    assert main(["run", "-T", "cigar", "-n", "2", "-N", "200", "-o", out]) == EXIT_OK
    summary = _last_json(capsys)
    assert summary["out"] == out and summary["evals"] >= 200

def test_run_is_reproducible(tmp_path):
    dumps = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(["run", "-T", "gaussian", "-n", "3", "-N", "1k", "-s", "3", "-o", out, "--no-timing"]) == EXIT_OK
        with open(os.path.join(out, "partitions.jsonl"), "rb") as f:
            dumps.append(f.read())
        with open(os.path.join(out, "timeline.csv"), "rb") as f:
            dumps.append(f.read())
    assert dumps[0] == dumps[2] and dumps[1] == dumps[3]

def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("target = gaussian\ndims = 3\nbudget = 100\nseed = 7\ncr3 = no\n")
    out = str(tmp_path / "out")
    assert main(["run", "-c", str(config), "-n", "2", "-o", out, "--no-timing"]) == EXIT_OK
    with open(os.path.join(out, "meta.json")) as f:
        meta = json.load(f)
    assert meta["config"]["dims"] == 2 and meta["config"]["seed"] == 7
    assert meta["criteria"]["use_cr3"] is False
    assert meta["domain"] == {"lower": [0.0, 0.0], "upper": [1.0, 1.0]}


def test_sample(uniform_out, tmp_path, capsys):
    tree = os.path.join(uniform_out, "partitions.jsonl")
    assert main(["sample", tree, "-k", "1000", "-o", str(tmp_path)]) == EXIT_OK
    assert _last_json(capsys)["samples"] == 1000
    with open(tmp_path / "samples.csv") as f:
        lines = f.read().splitlines()
    assert len(lines) == 1001 and lines[0] == "x0,x1"
    assert all(0.0 <= float(v) <= 1.0 for line in lines[1:] for v in line.split(","))

def test_sample_region_and_empty(uniform_out, tmp_path):
    tree = os.path.join(uniform_out, "partitions.jsonl")
    assert main(["sample", tree, "-k", "200", "--lo", "0.5", "0.5", "-o", str(tmp_path)]) == EXIT_OK
    with open(tmp_path / "samples.csv") as f:
        rows = list(csv.reader(f))[1:]
    assert all(float(x) >= 0.5 and float(y) >= 0.5 for x, y in rows)
    assert main(["sample", tree, "-k", "0", "-o", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "samples.csv").read_text() == "x0,x1\n"

@pytest.mark.parametrize("argv, expected", [
    (["evidence"], {"value": 1.0, "log_value": 0.0, "all_zero": False}),
    (["density", "--at", "0.2", "0.7"], {"value": 1.0}),
    (["subregion", "--lo", "0", "0", "--hi", "0.5", "0.5"], {"mass": 0.25, "probability": 0.25}),
    (["marginal", "--dims", "0", "--at", "0.3"], {"value": 1.0}),
])
def test_query(uniform_out, capsys, argv, expected):
    assert main(["query", os.path.join(uniform_out, "partitions.jsonl")] + argv) == EXIT_OK
    record = _last_json(capsys)
    assert record["query"] == argv[0]
    for key, value in expected.items():
        assert record[key] == pytest.approx(value, abs=1e-12)

def test_query_conditional(uniform_out, capsys):
    assert main(["query", os.path.join(uniform_out, "partitions.jsonl"), "conditional", "--dims", "1", "--at", "0.4"]) == EXIT_OK
    pieces = _last_json(capsys)["pieces"]
    assert sum((p["hi"][0] - p["lo"][0]) * p["density"] for p in pieces) == pytest.approx(1.0, rel=1e-12)


def test_configuration_errors(uniform_out, tmp_path, capsys):
    tree = os.path.join(uniform_out, "partitions.jsonl")
    assert main(["run", "-N", "100", "-o", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "-T", "banana", "-n", "2", "-N", "100", "-o", str(tmp_path)]) == EXIT_CONFIG
    assert main(["query", tree, "density"]) == EXIT_CONFIG
    assert main(["query", tree, "density", "--at", "1.5", "0.5"]) == EXIT_CONFIG
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["run", "-c", str(bad), "-o", str(tmp_path)]) == EXIT_CONFIG
    assert "ERROR" in capsys.readouterr().err

def test_corrupt_tree(tmp_path):
    tree = tmp_path / "partitions.jsonl"
    tree.write_text('{"id": 0, "lo": [0, 0], "hi": [0.5, 1], "depths": [1, 0], "log_f": 0}\n')
    assert main(["query", str(tree), "evidence"]) == EXIT_CONFIG
    tree.write_text("{broken\n")
    assert main(["sample", str(tree), "-o", str(tmp_path)]) == EXIT_CONFIG

def test_output_under_a_file_is_a_configuration_error(uniform_out, tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    out = str(blocker / "out")
    assert main(["run", "-T", "uniform", "-n", "2", "-N", "50", "-o", out]) == EXIT_CONFIG
    assert "output directory" in capsys.readouterr().err
    tree = os.path.join(uniform_out, "partitions.jsonl")
    assert main(["sample", tree, "-k", "5", "-o", out]) == EXIT_CONFIG
    assert main(["bench", "-T", "uniform", "-n", "2", "--budgets", "100", "--seeds", "1", "-o", out]) == EXIT_CONFIG
    assert blocker.read_text() == ""

def test_unknown_subcommand_arguments():
    with pytest.raises(SystemExit) as exp:
        main(["query"])
    assert exp.value.code == 2

def test_external_failure_is_a_runtime_error(tmp_path):
    script = tmp_path / "broken.py"
    script.write_text(textwrap.dedent('''
        import sys
        sys.stdin.readline()
        print("OK", flush=True)
        for line in sys.stdin:
            print("oops", flush=True)
    '''))
    command = "{} {}".format(sys.executable, script)
    argv = ["run", "-T", "external", "-n", "2", "-N", "50", "--external-cmd", command, "-o", str(tmp_path / "out")]
    assert main(argv) == EXIT_RUNTIME
    assert not os.path.exists(tmp_path / "out" / "partitions.jsonl")


def test_bench_uniform_and_summary(tmp_path, capsys):
    out = str(tmp_path / "bench")
    argv = ["bench", "-T", "uniform", "-n", "2", "--budgets", "100,300", "--seeds", "2", "-o", out, "--no-timing"]
    assert main(argv) == EXIT_OK
    assert _last_json(capsys)["rows"] == 12
    with open(os.path.join(out, "bench.csv")) as f:
        rows = list(csv.DictReader(f))
    assert {r["method"] for r in rows} == {"defer", "rejection_uniform", "grid"}
    assert all(float(r["log_z_error"]) <= 1e-12 for r in rows)

    assert bench_summary.main([os.path.join(out, "bench.csv")]) == 0
    summary = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert len(summary) == 6
    assert all(int(r["runs"]) == 2 for r in summary)

def test_bench_needs_an_oracle(tmp_path):
    argv = ["bench", "-T", "gaussian", "-n", "2", "--budgets", "100", "--seeds", "1", "-o", str(tmp_path)]
    assert main(argv) == EXIT_CONFIG
    assert main(argv + ["--oracle", "grid:zero"]) == EXIT_CONFIG

def test_bench_with_grid_oracle(tmp_path, capsys):
    argv = ["bench", "-T", "gaussian", "-n", "2", "--budgets", "200", "--seeds", "1", "--methods", "defer,grid",
            "--oracle", "grid:300", "-o", str(tmp_path), "--no-timing"]
    assert main(argv) == EXIT_OK
    with open(tmp_path / "bench.csv") as f:
        rows = list(csv.DictReader(f))
    assert [r["method"] for r in rows] == ["defer", "grid"]
    assert math.isfinite(float(rows[0]["log_z_error"]))
    assert float(rows[1]["log_z_error"]) < 0.01

def test_summary_missing_file(tmp_path):
    assert bench_summary.main([str(tmp_path / "absent.csv")]) == 2
