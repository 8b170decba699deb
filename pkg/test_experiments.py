"""
Tests for the experiment harness: spec parsing, registry dispatch, exit codes and reports.
"""
import json
import os

import pytest

from app import config
from app.errors import ParseError
from app.services import experiments
from app.services.experiments import EXPERIMENTS, ExperimentSpec, load_experiment_spec, run_experiment
from app.services.ground import VerdictReport


def _spec(tmp_path, **fields):
    return ExperimentSpec(output=str(tmp_path), **fields)


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read().splitlines()


def test_parameters_accept_ints_lists_and_ranges():
    spec = ExperimentSpec(experiment="census", parameters={"m": 2, "k": [1, 3], "n": "2..4"})
    assert spec.parameters == {"m": [2], "k": [1, 3], "n": [2, 3, 4]}
    assert spec.values("m", [9]) == [2]
    assert spec.values("missing", [9]) == [9]


def test_load_experiment_spec(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"experiment": "dhm-sweep", "parameters": {"k": "4..5"}}))
    spec = load_experiment_spec(str(path))
    assert spec.experiment == "dhm-sweep"
    assert spec.parameters["k"] == [4, 5]


@pytest.mark.parametrize(
    "document",
    [
        {"parameters": {"k": 4}},
        {"experiment": "census", "format": "parquet"},
        {"experiment": "census", "seed": "soon"},
    ],
)
def test_load_experiment_spec_rejects_bad_documents(tmp_path, document):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(document))
    with pytest.raises(ParseError):
        load_experiment_spec(str(path))


def test_missing_spec_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_experiment_spec(str(tmp_path / "absent.json"))


def test_registry_names():
    assert {
        "dhm-sweep",
        "identities",
        "volume-sweep",
        "splittable-fraction",
        "parity-oracle",
        "census",
        "census-invariance",
        "nsep-bounds",
        "separation-probability",
        "hamming-bridge",
        "implications",
        "recognition-timing",
        "split-bounds",
        "min-search",
    } <= set(EXPERIMENTS)


def test_dhm_sweep_writes_reports(tmp_path):
    outcome = run_experiment(_spec(tmp_path, experiment="dhm-sweep", parameters={"k": [4]}))
    assert outcome.exit_code == 0
    assert outcome.failures == []
    assert sorted(os.path.basename(path) for path in outcome.files) == [
        "dhm-sweep.csv",
        "dhm-sweep.failures.json",
        "dhm-sweep.summary.txt",
    ]
    lines = _read_csv(tmp_path / "dhm-sweep.csv")
    assert lines[0] == "# dhm-sweep: k,s,t,b,count,formula"
    assert lines[1] == "k,s,t,b,count,formula"
    assert len(lines) - 2 == len(outcome.rows)
    assert "status: PASS" in (tmp_path / "dhm-sweep.summary.txt").read_text()
    assert json.loads((tmp_path / "dhm-sweep.failures.json").read_text()) == []


def test_census_experiment(tmp_path):
    outcome = run_experiment(_spec(tmp_path, experiment="census", parameters={"m": [1, 2]}))
    assert outcome.exit_code == 0
    counts = {(row["m"], row["k"]): row["count"] for row in outcome.rows}
    assert counts[(2, 2)] == 2
    assert counts[(2, 4)] == 1
    assert len(outcome.rows) == 3 + 5


def test_min_search_experiment(tmp_path):
    outcome = run_experiment(_spec(tmp_path, experiment="min-search", parameters={"k": "2..5"}))
    assert outcome.exit_code == 0
    assert [row["value"] for row in outcome.rows] == [1, 2, 2, 3]


def test_volume_sweep_experiment(tmp_path):
    outcome = run_experiment(_spec(tmp_path, experiment="volume-sweep", parameters={"k": [4, 8]}))
    assert outcome.exit_code == 0
    assert outcome.rows[-1]["max_volume"] == 182


def test_seeded_parity_oracle(tmp_path):
    spec = _spec(tmp_path, experiment="parity-oracle", seed=3, samples=50, parameters={"k": [2], "random_k": [6]})
    outcome = run_experiment(spec)
    assert outcome.exit_code == 0
    assert [row["triples"] for row in outcome.rows] == [64, 50]


def test_unknown_experiment(tmp_path):
    outcome = run_experiment(_spec(tmp_path, experiment="no-such-sweep"))
    assert outcome.exit_code == 2
    assert outcome.files == []


def test_randomized_experiment_needs_seed(tmp_path):
    outcome = run_experiment(_spec(tmp_path, experiment="nsep-bounds"))
    assert outcome.exit_code == 2
    assert outcome.failures[0]["check"] == "DomainError"
    assert "status: ERROR" in (tmp_path / "nsep-bounds.summary.txt").read_text()


def test_guard_stops_experiment(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "UNSAFE_LIMITS", False)
    outcome = run_experiment(_spec(tmp_path, experiment="census", parameters={"m": [5]}))
    assert outcome.exit_code == 2
    assert outcome.failures[0]["check"] == "GuardExceeded"
    assert config.UNSAFE_LIMITS is False


def test_unsafe_limits_are_restored(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "UNSAFE_LIMITS", False)
    run_experiment(_spec(tmp_path, experiment="splittable-fraction", parameters={"k": [2]}, unsafe_limits=True))
    assert config.UNSAFE_LIMITS is False
    assert not config.limits_disabled()


def test_unsafe_limits_lift_the_guard_inside_the_run(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "CENSUS_M_GUARD", 1)
    outcome = run_experiment(_spec(tmp_path, experiment="census", parameters={"m": [2]}, unsafe_limits=True))
    assert outcome.exit_code == 0
    assert len(outcome.rows) == 5


def _smoke(tmp_path, name, columns, **fields):
    outcome = run_experiment(_spec(tmp_path, experiment=name, **fields))
    assert outcome.exit_code == 0, outcome.failures
    assert outcome.failures == []
    lines = _read_csv(tmp_path / f"{name}.csv")
    assert lines[0] == f"# {name}: {','.join(columns)}"
    assert lines[1] == ",".join(columns)
    assert len(lines) - 2 == len(outcome.rows) > 0
    assert json.loads((tmp_path / f"{name}.failures.json").read_text()) == []
    return outcome


def test_identities_experiment(tmp_path):
    outcome = _smoke(tmp_path, "identities", ["s", "t", "k", "checked", "holds"], parameters={"k": [6]})
    assert all(row["holds"] and row["checked"] > 0 for row in outcome.rows)


def test_implications_experiment(tmp_path):
    columns = ["kind", "k", "n", "i", "j", "checked", "premise_held", "holds", "inconclusive", "skipped"]
    outcome = _smoke(
        tmp_path, "implications", columns, seed=5, trials=20, parameters={"k": [6], "n": [2], "i": [1], "j": [2]}
    )
    assert len(outcome.rows) == 10
    assert not any(row["skipped"] or row["inconclusive"] for row in outcome.rows)
    positive = [row for row in outcome.rows if row["premise_held"] >= 0]
    assert len(positive) == 3
    assert all(row["premise_held"] > 0 for row in positive)


def test_implications_experiment_flags_a_vacuous_premise(tmp_path, monkeypatch):
    monkeypatch.setattr(experiments, "check_implication", _vacuous_check)
    outcome = run_experiment(_spec(tmp_path, experiment="implications", seed=1, parameters={"k": [6], "n": [2]}))
    assert outcome.exit_code == 1
    assert {failure["check"] for failure in outcome.failures} == {"premise exercised"}


def _vacuous_check(kind, params, k, seed=0, trials=200):
    return VerdictReport(kind=kind.value, params={**params, "premise_held": 0}, holds=False, inconclusive=True)


def test_hamming_bridge_experiment(tmp_path):
    columns = ["source", "n", "k", "min_distance", "max_distance", "expected"]
    outcome = _smoke(tmp_path, "hamming-bridge", columns, seed=1, trials=2, parameters={"n": [1, 2, 3], "k": [6]})
    assert [row["min_distance"] for row in outcome.rows[:3]] == [2, 4, 8]
    assert [row["source"] for row in outcome.rows[3:]] == ["table", "seed-1", "seed-2"]


def test_split_bounds_experiment(tmp_path):
    columns = ["k", "seed", "size", "draws", "lower", "ceiling", "certified"]
    outcome = _smoke(tmp_path, "split-bounds", columns, seed=2, trials=3, parameters={"k": [4]})
    assert [row["seed"] for row in outcome.rows] == [2, 3, 4]
    assert all(row["certified"] for row in outcome.rows)


def test_separation_probability_experiment(tmp_path):
    columns = ["n", "k", "samples", "estimate", "stderr", "floor"]
    outcome = _smoke(tmp_path, "separation-probability", columns, seed=3, samples=500,
                     parameters={"n": [1, 2], "k": [8]})
    assert [row["floor"] for row in outcome.rows] == [0.5, 0.25]


def test_census_invariance_experiment(tmp_path):
    columns = ["m", "k", "trials", "group_order", "group_size", "broken"]
    outcome = _smoke(tmp_path, "census-invariance", columns, seed=4, trials=5, parameters={"m": [2, 3], "k": [3, 5]})
    assert [(row["m"], row["k"]) for row in outcome.rows] == [(2, 3), (3, 3), (3, 5)]
    assert [row["group_order"] for row in outcome.rows] == [8, 48, 48]
    assert all(row["broken"] == 0 for row in outcome.rows)


def test_recognition_timing_keeps_timings_out_of_the_csv(tmp_path):
    fields = {"seed": 1, "trials": 3, "parameters": {"m": [8], "k": [64]}}
    _smoke(tmp_path / "first", "recognition-timing", ["m", "k", "trials", "separating"], **fields)
    run_experiment(_spec(tmp_path / "second", experiment="recognition-timing", **fields))
    first = (tmp_path / "first" / "recognition-timing.csv").read_bytes()
    assert first == (tmp_path / "second" / "recognition-timing.csv").read_bytes()
    summary = (tmp_path / "first" / "recognition-timing.summary.txt").read_text()
    assert "volatile: median_seconds,ratio" in summary
    assert "m=8 k=64 trials=3" in summary
