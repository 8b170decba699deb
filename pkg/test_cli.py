"""
Tests for the sepsplit command line: output, exit codes and counterexample files.
"""
import json

import pytest

from app import config
from app.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, main

MIN_SEP_8_TEXT = "k=8\n1,2,3,4\n1,2,5,6\n1,3,5,7\n"


@pytest.fixture(autouse=True)
def _isolated(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "UNSAFE_LIMITS", False)
    monkeypatch.setattr(config, "REPORT_DIR", str(tmp_path / "reports"))


def _family_file(tmp_path, text=MIN_SEP_8_TEXT):
    path = tmp_path / "family.txt"
    path.write_text(text)
    return str(path)


def test_construct_min_sep(capsys):
    assert main(["construct", "min-sep", "--k", "8"]) == EXIT_OK
    assert capsys.readouterr().out == MIN_SEP_8_TEXT


def test_construct_writes_out_file(tmp_path):
    out = tmp_path / "interval.txt"
    assert main(["construct", "interval-split", "--k", "4", "--out", str(out)]) == EXIT_OK
    assert out.read_text() == "k=4\n1,2\n2,3\n"


def test_construct_two_sep_from_file(tmp_path, capsys):
    assert main(["construct", "2-sep", _family_file(tmp_path)]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 1 + 6


def test_verify_holds(tmp_path, capsys):
    assert main(["verify", "sep", _family_file(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out == "sep: holds\n"


def test_verify_violation_writes_counterexample(tmp_path):
    out = tmp_path / "cx.json"
    assert main(["verify", "nsep", _family_file(tmp_path), "--n", "2", "--out", str(out)]) == EXIT_VIOLATED
    payload = json.loads(out.read_text())
    assert payload == {"property": "nsep", "counterexample": [[1, 2], [1, 3]]}


def test_verify_split_violation_goes_to_report_dir(tmp_path):
    assert main(["verify", "split", _family_file(tmp_path, "k=4\n1,2\n")]) == EXIT_VIOLATED
    payload = json.loads((tmp_path / "reports" / "counterexample.json").read_text())
    assert payload["counterexample"] == [[1, 2]]


def test_verify_bad_family_is_usage_error(tmp_path):
    assert main(["verify", "sep", _family_file(tmp_path, "k=3\n1,9\n")]) == EXIT_USAGE


def test_count_commands(capsys):
    assert main(["count", "splitters", "--s", "2", "--t", "2", "--b", "2", "--k", "4"]) == EXIT_OK
    assert capsys.readouterr().out == "splitters(s=2, t=2, b=2, k=4) = 8 (formula 8)\n"
    assert main(["count", "sep-census", "--m", "2"]) == EXIT_OK
    assert "sep(2,2) = 2" in capsys.readouterr().out.splitlines()


def test_search_min(capsys):
    assert main(["search", "min", "--k", "5"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "min family size for separating at k=5: 3 (exhausted=True)"
    assert out[1] == "k=5"
    assert len(out) == 2 + 3


def test_search_guard_is_usage_error():
    assert main(["search", "min", "--k", "12"]) == EXIT_USAGE


def test_unsafe_limits_flag_is_scoped_to_the_command():
    assert main(["count", "sep-census", "--m", "1", "--unsafe-limits"]) == EXIT_OK
    assert config.UNSAFE_LIMITS is False
    assert not config.limits_disabled()


def test_check_implications_needs_seed(caplog):
    assert main(["check", "implications", "--k", "6"]) == EXIT_USAGE
    assert "--seed" in caplog.text


def test_check_implications_with_seed(capsys):
    assert main(["check", "implications", "--k", "6", "--seed", "5"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 10
    assert all(": holds (" in line for line in out)


def test_check_parity_oracle(capsys):
    assert main(["check", "parity-oracle", "--k", "2"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("64 triples")


@pytest.mark.parametrize(
    "argv",
    [
        ["construct", "min-sep"],
        ["construct", "no-such-thing", "--k", "4"],
        ["count", "splitters", "--s", "2"],
        [],
    ],
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_experiment_run(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"experiment": "splittable-fraction", "parameters": {"k": "1..2"}}))
    out = tmp_path / "out"
    assert main(["experiment", "run", str(spec), "--out", str(out)]) == EXIT_OK
    assert (out / "splittable-fraction.csv").exists()
