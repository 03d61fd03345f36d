"""Command-line interface tests via click's in-process runner."""

import json

import pytest
from click.testing import CliRunner

from rmx import cohort, schema as schema_mod, synth
from rmx.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, runner):
    """A spec file plus the cohort CSV generated from it."""
    root = tmp_path_factory.mktemp("cli")
    synth.save_spec(synth.default_synth_spec(n=1500, seed=11), root / "spec.json")
    result = runner.invoke(main, ["synth", "--spec", str(root / "spec.json"),
                                  "--out", str(root / "cohort.csv")])
    assert result.exit_code == 0, result.output
    return root


def test_models_table(runner):
    result = runner.invoke(main, ["models"])
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert [line.split(":")[0] for line in lines] == ["ehr-af", "charge-af", "c2hest"]
    assert "horizon=1826d" in lines[0]


def test_models_json(runner, tmp_path):
    out = tmp_path / "models.json"
    result = runner.invoke(main, ["models", "--out", str(out)])
    assert result.exit_code == 0
    docs = json.loads(out.read_text())
    assert [doc["name"] for doc in docs] == ["ehr-af", "charge-af", "c2hest"]


def test_synth_writes_cohort_and_ledger(runner, workdir):
    snapshot = cohort.load_csv(workdir / "cohort.csv", schema_mod.builtin_schema())
    assert snapshot.n == 1500

    result = runner.invoke(main, ["synth", "--spec", str(workdir / "spec.json"),
                                  "--out", str(workdir / "again.csv")])
    assert result.exit_code == 0
    assert "generated" in result.output
    assert "events within horizon" in result.output
    assert "target 1.6600%" in result.output
    # same spec, same bytes
    assert (workdir / "again.csv").read_bytes() == (workdir / "cohort.csv").read_bytes()


def test_synth_seed_override(runner, workdir, tmp_path):
    out = tmp_path / "reseeded.csv"
    result = runner.invoke(main, ["synth", "--spec", str(workdir / "spec.json"),
                                  "--seed", "12", "--out", str(out)])
    assert result.exit_code == 0
    assert out.read_bytes() != (workdir / "cohort.csv").read_bytes()


def test_synth_infeasible_target_exits_4(runner, tmp_path):
    spec = synth.default_synth_spec(n=400, seed=3, target_incidence=0.999,
                                    horizon_days=1)
    synth.save_spec(spec, tmp_path / "bad.json")
    result = runner.invoke(main, ["synth", "--spec", str(tmp_path / "bad.json"),
                                  "--out", str(tmp_path / "never.csv")])
    assert result.exit_code == 4
    assert "computation error" in result.output
    assert not (tmp_path / "never.csv").exists()


def report_args(workdir, out, extra=()):
    return ["report", "--cohort", str(workdir / "cohort.csv"),
            "--group-by", "sex",
            "--models", "ehr-af,c2hest",
            "--protected", "sex=male,female",
            "--out", str(out), *extra]


def test_report_runs_are_byte_identical(runner, workdir, tmp_path):
    first, second = tmp_path / "r1.json", tmp_path / "r2.json"
    result = runner.invoke(main, report_args(workdir, first))
    assert result.exit_code == 0, result.output
    assert "wrote" in result.output and "2 subgroups x 2 models" in result.output
    result = runner.invoke(main, report_args(workdir, second))
    assert result.exit_code == 0
    assert first.read_bytes() == second.read_bytes()

    payload = json.loads(first.read_text())
    assert set(payload) == {"request", "summary", "distribution", "survival"}
    assert set(payload["distribution"]) == {"ehr-af", "c2hest"}
    assert payload["request"]["audit"] is None
    entry = payload["summary"]["subgroups"][0]["models"]["ehr-af"]
    assert "audit_disabled" in entry["fairness"]["sex"]["flags"]


def test_report_with_audit(runner, workdir, tmp_path):
    out = tmp_path / "audited.json"
    extra = ["--audit", "--audit-fraction", "0.05", "--models", "ehr-af"]
    result = runner.invoke(main, report_args(workdir, out, extra))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["request"]["audit"]["sample_fraction"] == 0.05
    for group in payload["summary"]["subgroups"]:
        fairness = group["models"]["ehr-af"]["fairness"]["sex"]
        assert 0.0 <= fairness["if_violation_rate"] <= 1.0
        assert fairness["n_audited"] >= 1


def test_report_binned_continuous_axis(runner, workdir, tmp_path):
    out = tmp_path / "binned.json"
    result = runner.invoke(main, ["report", "--cohort", str(workdir / "cohort.csv"),
                                  "--group-by", "age",
                                  "--bins", "age=40:60:120",
                                  "--models", "c2hest",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    labels = [g["label"] for g in json.loads(out.read_text())["summary"]["subgroups"]]
    assert labels == ["age=[40,60)", "age=[60,120]"]


def test_report_usage_errors(runner, workdir, tmp_path):
    out = tmp_path / "x.json"
    bad = [
        report_args(workdir, out, ["--threshold-risk", "1.5"]),
        report_args(workdir, out, ["--protected", "sex"]),
        report_args(workdir, out, ["--models", "ehr-af,framingham"]),
        report_args(workdir, out, ["--bins", "age"]),
    ]
    for args in bad:
        result = runner.invoke(main, args)
        assert result.exit_code == 2, args
    assert not out.exists()


def test_report_missing_cohort_exits_3(runner, tmp_path):
    result = runner.invoke(main, ["report", "--cohort", str(tmp_path / "no.csv"),
                                  "--group-by", "sex",
                                  "--out", str(tmp_path / "x.json")])
    assert result.exit_code == 3
    assert "data error" in result.output


def test_explain_writes_payload(runner, workdir, tmp_path):
    out = tmp_path / "explain.json"
    result = runner.invoke(main, ["explain", "--cohort", str(workdir / "cohort.csv"),
                                  "--group-by", "sex",
                                  "--subgroup", "sex=female",
                                  "--model", "ehr-af",
                                  "--fraction", "0.2",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["subgroup"] == "sex=female"
    assert payload["model"] == "ehr-af"
    assert len(payload["records"]) >= 1
    assert "records" in result.output and "features" in result.output


def test_explain_unknown_subgroup_exits_3(runner, workdir, tmp_path):
    result = runner.invoke(main, ["explain", "--cohort", str(workdir / "cohort.csv"),
                                  "--group-by", "sex",
                                  "--subgroup", "sex=other",
                                  "--model", "ehr-af",
                                  "--out", str(tmp_path / "x.json")])
    assert result.exit_code == 3


def test_explain_bad_fraction_exits_2(runner, workdir, tmp_path):
    result = runner.invoke(main, ["explain", "--cohort", str(workdir / "cohort.csv"),
                                  "--group-by", "sex",
                                  "--subgroup", "sex=female",
                                  "--model", "ehr-af",
                                  "--fraction", "0",
                                  "--out", str(tmp_path / "x.json")])
    assert result.exit_code == 2
