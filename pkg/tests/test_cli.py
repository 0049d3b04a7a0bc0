import json

import pytest

from fogsim.cli import main, parse_seeds
from fogsim.scenario import load_scenario_text


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def test_run_builtin_writes_report(run, tmp_path):
    out = tmp_path / "report.json"
    log = tmp_path / "events.jsonl"
    code, stdout, _ = run("run", "--builtin", "deadline_test", "--seed", "7", "--horizon", "1000",
                          "--out", str(out), "--event-log", str(log))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["metrics"]["seed"] == 7 and doc["metrics"]["horizon_ms"] == 1000.0
    assert "Energy consumed" in stdout
    first = json.loads(log.read_text().splitlines()[0])
    assert {"t", "kind", "device"} <= set(first)


def test_repeated_runs_are_byte_identical(run, tmp_path):
    paths = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        assert run("run", "--builtin", "deadline_test", "--seed", "7", "--horizon", "800", "--out", str(p))[0] == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_missing_scenario_is_usage_error(run):
    code, _, err = run("run", "--scenario", "missing.file")
    assert code == 2 and "not found" in err


def test_bad_flag_is_usage_error(run):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--builtin", "deadline_test", "--bogus"])
    assert exc.value.code == 2


def test_invalid_scenario_is_validation_error(run, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("name: bad\ntopology: {}\napplication: {builtin: nope}\nplacement: {policy: greedy}\n")
    code, _, err = run("run", "--scenario", str(path))
    assert code == 3
    assert "nope" in err and "greedy" in err


def test_syntax_error_exit_code(run, tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("name: [unclosed\n")
    code, _, err = run("run", "--scenario", str(path))
    assert code == 3 and "line" in err


def test_csv_format(run):
    code, stdout, _ = run("run", "--builtin", "sequential", "--horizon", "300", "--format", "csv")
    assert code == 0 and stdout.startswith("metric,entity,value\n")


def test_sweep(run, tmp_path):
    out = tmp_path / "sweep.json"
    log = tmp_path / "ev.jsonl"
    code, _, _ = run("run", "--builtin", "mobility_demo", "--sweep", "1-3", "--jobs", "2",
                     "--horizon", "300", "--format", "machine", "--out", str(out), "--event-log", str(log))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["seeds"] == [1, 2, 3]
    assert [r["metrics"]["seed"] for r in doc["runs"]] == [1, 2, 3]
    assert (tmp_path / "ev.seed2.jsonl").exists()


def test_scenario_subcommand_round_trips(run, tmp_path):
    code, stdout, _ = run("scenario", "--builtin", "healthcare", "--seed", "4")
    assert code == 0
    assert stdout.startswith("# Smart-healthcare")
    assert load_scenario_text(stdout).seed == 4


@pytest.mark.parametrize("text,seeds", [("1-3", [1, 2, 3]), ("5,2", [5, 2]), ("1-2,9", [1, 2, 9])])
def test_parse_seeds(text, seeds):
    assert parse_seeds(text) == seeds
