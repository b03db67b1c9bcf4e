import json

import numpy as np
import pytest

from main import main
from modules import experiment_runner
from modules.errors import ConfigError, ReportError
from modules.experiment_runner import EXIT_FAILED, EXIT_OK, EXIT_USAGE, Assertion, ExperimentConfig, load_ensemble, run
from utils.database import RunLedger
from utils.report_io import csv_text, dumps, format_float


@pytest.fixture(autouse=True)
def ledger(tmp_path, monkeypatch):
    ledger = RunLedger(tmp_path / "runs.db")
    monkeypatch.setattr(experiment_runner, "run_ledger", ledger)
    return ledger


def _write_config(tmp_path, data, name="experiment.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_verify_algebra_passes(tmp_path):
    out = tmp_path / "algebra.json"
    code = run("verify-algebra", out_path=out, overrides={"seed": 7, "trials": 5, "max_degree": 3})
    assert code == EXIT_OK
    report = _read(out)
    assert report["passed"] is True
    assert report["seed"] == 7
    assert {a["name"] for a in report["assertions"]} == {
        "ccr", "power_rule", "bracket_identity_phi", "bracket_identity_pi"
    }


def test_reports_are_byte_identical_across_runs(tmp_path, ledger):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    overrides = {"seed": 11, "trials": 3}
    assert run("verify-algebra", out_path=first, overrides=overrides) == EXIT_OK
    assert run("verify-algebra", out_path=second, overrides=overrides) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    runs = ledger.get_runs("verify-algebra")
    assert len(runs) == 2
    assert runs[0]["report_sha256"] == runs[1]["report_sha256"]
    assert runs[0]["seed"] == "11"


def test_missing_seed_is_a_config_error(tmp_path):
    out = tmp_path / "algebra.json"
    assert run("verify-algebra", out_path=out) == EXIT_USAGE
    report = _read(out)
    assert report["passed"] is False
    assert report["error"]["pointer"] == "/seed"


def test_malformed_weights_point_to_the_field(tmp_path):
    path = _write_config(tmp_path, {
        "seed": 1,
        "system": {"cutoff": 20},
        "ensemble": {"points": [{"phi": [0.1], "pi": [0.2]}, {"phi": [0.3], "pi": [0.0]}], "weights": [0.7, 0.7]},
    })
    out = tmp_path / "encode.json"
    assert run("encode", path, out) == EXIT_USAGE
    assert _read(out)["error"]["pointer"] == "/ensemble/weights"


def test_bad_polynomial_reports_pointer(tmp_path):
    path = _write_config(tmp_path, {
        "hamiltonian": "0.5*pi1^2 + 0.5*psi1^2",
        "ensemble": {"points": [{"phi": [0.1], "pi": [0.2]}]},
    })
    out = tmp_path / "compare.json"
    assert run("compare", path, out) == EXIT_USAGE
    assert _read(out)["error"]["pointer"] == "/hamiltonian"


def test_tail_refusal_exits_with_failure(tmp_path):
    path = _write_config(tmp_path, {
        "system": {"cutoff": 5},
        "ensemble": {"points": [{"phi": [3.0], "pi": [0.0]}]},
    })
    out = tmp_path / "encode.json"
    assert run("encode", path, out) == EXIT_FAILED
    assert _read(out)["error"]["type"] == "TailBoundError"


def test_encode_suite_from_toml(tmp_path):
    path = tmp_path / "encode.toml"
    path.write_text(
        'seed = 3\n'
        'hamiltonian = "0.5*pi1^2 + 0.5*phi1^2"\n'
        '[system]\ncutoff = 30\n'
        '[ensemble]\npoints = [{phi = [0.6], pi = [0.2]}, {phi = [-0.3], pi = [0.5]}]\nweights = [0.5, 0.5]\n',
        encoding="utf-8",
    )
    out = tmp_path / "encode.json"
    assert run("encode", path, out) == EXIT_OK
    observables = _read(out)["results"]["observables"]
    assert [o["poly"] for o in observables] == ["1*phi1", "1*pi1", "0.5*phi1^2 + 0.5*pi1^2"]
    assert observables[2]["classical"] == pytest.approx(0.185)


def test_csv_output_writes_table_and_json(tmp_path):
    out = tmp_path / "algebra.csv"
    assert run("verify-algebra", out_path=out, fmt="csv", overrides={"seed": 2, "trials": 2}) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "name,value,tolerance,bound,passed"
    assert len(lines) == 5
    assert _read(out.with_suffix(".json"))["subcommand"] == "verify-algebra"


def test_unknown_subcommand_and_format(tmp_path):
    assert run("sample", out_path=tmp_path / "x.json") == EXIT_USAGE
    assert run("verify-algebra", out_path=tmp_path / "x.xml", fmt="xml") == EXIT_USAGE


def test_load_ensemble_from_sampler_is_seeded():
    raw = {"seed": 4, "system": {"modes": 2}, "ensemble": {"sampler": {"count": 3, "amplitude": 0.5}}}
    first = load_ensemble(ExperimentConfig(raw))
    second = load_ensemble(ExperimentConfig(raw))
    assert len(first) == 3
    assert first.mode_count == 2
    assert (first.phi == second.phi).all()


def test_overrides_are_folded_into_config_digest():
    base = ExperimentConfig({"seed": 1})
    overridden = ExperimentConfig({"seed": 1}, {"cutoff": 12})
    assert overridden.get_int("/system/cutoff") == 12
    assert base.sha256 != overridden.sha256
    with pytest.raises(ConfigError) as excinfo:
        ExperimentConfig({"system": {"cutoff": "many"}}).get_int("/system/cutoff")
    assert excinfo.value.pointer == "/system/cutoff"


def test_lower_bound_assertion():
    assert Assertion("gap", 1e-4, 1e-5, "lower").passed
    assert not Assertion("gap", 1e-6, 1e-5, "lower").passed
    assert not Assertion("gap", float("nan"), 1.0).passed
    assert Assertion("gap", float("nan"), 1.0).to_dict()["value"] is None


def test_report_serialization_is_deterministic():
    data = {"b": [0.1, -0.0, 3], "a": {"flag": True, "name": "x\ny"}}
    assert dumps(data) == '{\n  "b": [0.10000000000000001, 0, 3],\n  "a": {\n    "flag": true,\n    "name": "x\\ny"\n  }\n}\n'
    assert csv_text(["t", "x"], [[0.5, 1]]) == "t,x\n0.5,1\n"
    with pytest.raises(ReportError):
        format_float(float("nan"))


def test_cli_rejects_invalid_seed():
    with pytest.raises(SystemExit) as excinfo:
        main(["verify-algebra", "--seed", "-1"])
    assert excinfo.value.code == EXIT_USAGE


def test_cli_runs_subcommand(tmp_path):
    out = tmp_path / "cli.json"
    assert main(["verify-algebra", "--seed", "5", "--trials", "2", "--out", str(out)]) == EXIT_OK
    assert _read(out)["config"]["algebra"]["trials"] == 2


def test_unexpected_numeric_failure_still_writes_report(tmp_path, monkeypatch):
    def singular(cfg):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setitem(experiment_runner.SUITES, "verify-algebra", singular)
    out = tmp_path / "algebra.json"
    assert run("verify-algebra", out_path=out, overrides={"seed": 1}) == EXIT_FAILED
    assert out.exists()
    report = _read(out)
    assert report["passed"] is False
    assert report["error"]["type"] == "LinAlgError"


def test_phidot_observable_is_a_config_error(tmp_path):
    path = _write_config(tmp_path, {
        "system": {"cutoff": 20},
        "ensemble": {"points": [{"phi": [0.1], "pi": [0.2]}]},
        "encode": {"observables": ["phi1^2", "phidot1*phi1"]},
    })
    out = tmp_path / "encode.json"
    assert run("encode", path, out) == EXIT_USAGE
    assert _read(out)["error"]["pointer"] == "/encode/observables/1"
