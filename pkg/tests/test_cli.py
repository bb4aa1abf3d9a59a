import json
import pathlib

import pytest

from dfslab import UsageError
from dfslab.cli import build_parser, emit, entry, run_scenario
from dfslab.reporting import canonical_json

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


def load(name):
    return json.loads((SCENARIO_DIR / name).read_text())


@pytest.mark.parametrize(
    "name",
    [
        "distance.json",
        "symmetrize.json",
        "dfs.json",
        "decohere.json",
        "duality.json",
        "nctorus.json",
    ],
)
def test_shipped_scenarios_pass(name):
    report = run_scenario(load(name))
    assert report["pass"] is True
    assert report["schema_version"] == 1
    assert all(c["pass"] for c in report["checks"])


def test_complex_entries_parse_as_pairs():
    scenario = {
        "schema_version": 1,
        "kind": "distance",
        "params": {"lambda": [0.0, 2.0]},
    }
    report = run_scenario(scenario)
    assert report["pass"] is True
    assert report["results"]["distance"] == pytest.approx(0.5, abs=1e-6)


def test_failing_expectation_flips_overall_flag():
    scenario = {
        "schema_version": 1,
        "kind": "distance",
        "params": {"lambda": [1.0, 0.0], "expected": 999.0},
    }
    report = run_scenario(scenario)
    assert report["pass"] is False
    failed = [c for c in report["checks"] if not c["pass"]]
    assert failed


def test_schema_validation():
    with pytest.raises(UsageError):
        run_scenario({"schema_version": 2, "kind": "distance", "params": {}})
    with pytest.raises(UsageError):
        run_scenario({"schema_version": 1, "kind": "mystery", "params": {}})
    with pytest.raises(UsageError):
        run_scenario({"schema_version": 1, "kind": "distance", "params": []})
    with pytest.raises(UsageError):
        run_scenario({"schema_version": 1, "kind": "distance", "params": {}, "seed": "x"})


def test_tol_scale_must_be_positive():
    with pytest.raises(UsageError):
        run_scenario(load("distance.json"), tol_scale=0.0)


def test_report_serialization_is_deterministic(capsys):
    report = run_scenario(load("distance.json"))
    first = emit(report, fmt="json")
    second = emit(report, fmt="json")
    capsys.readouterr()
    assert first == second
    assert first == canonical_json(report)
    assert first.endswith("\n")


def test_csv_and_markdown_formats(tmp_path, capsys):
    report = run_scenario(load("distance.json"))
    csv_text = emit(report, fmt="csv", path=str(tmp_path / "r.csv"))
    assert csv_text.splitlines()[0] == "check,value,tolerance,pass"
    assert csv_text.splitlines()[-1].startswith("overall")
    md_text = emit(report, fmt="markdown", path=str(tmp_path / "r.md"))
    assert "| check | value | tolerance | pass |" in md_text
    with pytest.raises(UsageError):
        emit(report, fmt="yaml")
    capsys.readouterr()


def test_entry_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(load("distance.json")))
    assert entry(["run", str(good)]) == 0
    capsys.readouterr()

    failing = tmp_path / "failing.json"
    failing.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "kind": "distance",
                "params": {"lambda": [1.0, 0.0], "expected": 999.0},
            }
        )
    )
    assert entry(["run", str(failing)]) == 2
    capsys.readouterr()

    assert entry(["run", str(tmp_path / "missing.json")]) == 1
    capsys.readouterr()

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert entry(["run", str(broken)]) == 1
    capsys.readouterr()

    bad_kind = tmp_path / "bad_kind.json"
    bad_kind.write_text(json.dumps({"schema_version": 1, "kind": "what", "params": {}}))
    assert entry(["run", str(bad_kind)]) == 1
    capsys.readouterr()


def test_entry_writes_report_file(tmp_path, capsys):
    good = tmp_path / "scenario.json"
    good.write_text(json.dumps(load("distance.json")))
    out = tmp_path / "report.json"
    assert entry(["run", str(good), "--out", str(out)]) == 0
    capsys.readouterr()
    report = json.loads(out.read_text())
    assert report["pass"] is True


def test_seed_flag_is_echoed(tmp_path, capsys):
    good = tmp_path / "scenario.json"
    good.write_text(json.dumps(load("distance.json")))
    out = tmp_path / "report.json"
    assert entry(["run", str(good), "--seed", "17", "--out", str(out)]) == 0
    capsys.readouterr()
    report = json.loads(out.read_text())
    assert report["seed"] == 17


def test_parser_knows_both_commands():
    parser = build_parser()
    args = parser.parse_args(["run", "x.json", "--format", "csv"])
    assert args.format == "csv"
    args = parser.parse_args(["selftest", "--tol-scale", "2.0"])
    assert args.tol_scale == 2.0
