"""End-to-end runs of the command line through ``cli.main``."""

import csv
import io
import json
import math

import pytest

from stablefluct import cli
from stablefluct.api.records import SimulationRow

CAUCHY = ["--d", "2", "--alpha", "1.0"]


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_closest_reach_density(capsys):
    code, out, _ = _run(capsys, "eval", "--identity", "closest-reach-density", *CAUCHY, "--x", "2,0", "--y", "1,0")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["identity"] == "closest-reach-density"
    assert document["params"] == {"alpha": 1.0, "d": 2, "x": [2.0, 0.0], "y": [1.0, 0.0]}
    assert document["value"] == pytest.approx(math.sqrt(3.0) / math.pi**2, rel=1e-8)


def test_eval_survival_output_is_stable(capsys):
    code, out, _ = _run(capsys, "eval", "--identity", "survival", *CAUCHY, "--x", "2,0", "--r", "1")
    assert code == cli.EXIT_OK
    assert json.loads(out)["value"] == 0.666666667
    assert out.index('"identity"') < out.index('"params"') < out.index('"value"')


def test_eval_negative_coordinates(capsys):
    code, out, _ = _run(capsys, "eval", "--identity", "survival", *CAUCHY, "--x=-2,0", "--r", "1")
    assert code == cli.EXIT_OK
    assert json.loads(out)["value"] == 0.666666667


def test_eval_complex_value(capsys):
    code, out, _ = _run(capsys, "eval", "--identity", "levy-exponent", *CAUCHY, "--arg", "0")
    assert code == cli.EXIT_OK
    assert json.loads(out)["value"] == {"imag": 0.0, "real": 0.0}


def test_eval_domain_error(capsys):
    code, out, err = _run(capsys, "eval", "--identity", "survival", *CAUCHY, "--x", "0.5,0", "--r", "1")
    assert code == cli.EXIT_USAGE
    assert out == ""
    assert "require |x| > r" in err


def test_eval_missing_argument(capsys):
    code, _, err = _run(capsys, "eval", "--identity", "survival", *CAUCHY, "--x", "2,0")
    assert code == cli.EXIT_USAGE
    assert "survival requires --r" in err


def test_unknown_identity(capsys):
    code, _, err = _run(capsys, "eval", "--identity", "nope", *CAUCHY)
    assert code == cli.EXIT_USAGE
    assert "unknown identity: nope" in err


def test_dimension_mismatch(capsys):
    code, _, err = _run(capsys, "eval", "--identity", "survival", "--d", "3", "--alpha", "1.0", "--x", "2,0", "--r", "1")
    assert code == cli.EXIT_USAGE
    assert "dimension 2" in err


def test_bad_flag_is_a_usage_error(capsys):
    code, _, _ = _run(capsys, "eval", "--identity", "survival", *CAUCHY, "--nonsense", "1")
    assert code == cli.EXIT_USAGE


def test_help_exits_cleanly(capsys):
    code, out, _ = _run(capsys, "eval", "--help")
    assert code == cli.EXIT_OK
    assert "--identity" in out


def test_check_phi_minus(capsys):
    code, out, _ = _run(capsys, "check", "--suite", "phi-minus", *CAUCHY)
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["summary"]["failed"] == 0
    case = next(c for c in document["cases"] if c["params"]["lambda"] == 2.0)
    assert case["rhs"] == 2.0
    assert case["lhs"] == pytest.approx(2.0, rel=1e-8)
    assert case["pass"] is True


def test_check_rejects_alpha_out_of_range(capsys):
    code, out, err = _run(capsys, "check", "--suite", "normalization", "--d", "2", "--alpha", "3.0")
    assert code == cli.EXIT_USAGE
    assert out == ""
    assert "0 < alpha < 2" in err


def test_check_failure_exit_code(capsys):
    code, out, _ = _run(capsys, "check", "--suite", "poisson-kernel", *CAUCHY, "--tol", "1e-300")
    assert code == cli.EXIT_CHECK_FAILED
    assert json.loads(out)["summary"]["failed"] > 0


def test_list_registries(capsys):
    code, out, _ = _run(capsys, "check", "--list")
    assert code == cli.EXIT_OK
    names = [entry["name"] for entry in json.loads(out)]
    assert "phi-minus" in names and "normalization" in names
    code, out, _ = _run(capsys, "simulate", "--list")
    entry = next(e for e in json.loads(out) if e["name"] == "survival")
    assert "n" in entry["inputSchema"]["required"]


def test_config_file_with_overriding_flag(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"d": 2, "alpha": 1.5, "identity": "survival", "x": [2, 0], "r": 1}))
    code, out, _ = _run(capsys, "eval", "--config", str(path), "--alpha", "1.0")
    assert code == cli.EXIT_OK
    document = json.loads(out)
    assert document["params"]["alpha"] == 1.0
    assert document["value"] == 0.666666667


def test_config_file_must_be_an_object(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text("[1, 2]")
    code, _, err = _run(capsys, "eval", "--config", str(path), *CAUCHY)
    assert code == cli.EXIT_USAGE
    assert "JSON object" in err


def _simulate(capsys, tmp_path, name, *extra):
    out = tmp_path / f"{name}.csv"
    code, _, _ = _run(
        capsys,
        "simulate",
        "--experiment",
        "first-entrance-position",
        *CAUCHY,
        "--x",
        "2,0",
        "--r",
        "1",
        "--n",
        "200",
        "--out",
        str(out),
        *extra,
    )
    assert code == cli.EXIT_OK
    return out


def test_simulate_writes_csv_and_manifest(capsys, tmp_path):
    out = _simulate(capsys, tmp_path, "first", "--seed", "3")
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["experiment", "d", "alpha", "x", "r", "estimate", "stderr", "n", "reference", "seed", "ks"]
    assert rows[1][0] == "first-entrance-position"
    assert rows[1][3] == "2,0"
    assert rows[1][7] == "200"
    assert float(rows[1][8]) == pytest.approx(1.0 / 3.0)
    manifest = json.loads((tmp_path / "first.csv.manifest.json").read_text())
    assert manifest["config"]["seed"] == 3
    assert manifest["config"]["workers"] == 1
    assert manifest["config"]["experiment"] == "first-entrance-position"
    assert set(manifest["versions"]) == {"numpy", "scipy"}
    assert not list(tmp_path.glob(".stablefluct-*"))


def test_simulate_is_reproducible(capsys, tmp_path):
    first = _simulate(capsys, tmp_path, "first", "--seed", "9")
    second = _simulate(capsys, tmp_path, "second", "--seed", "9")
    other = _simulate(capsys, tmp_path, "other", "--seed", "10")
    assert first.read_bytes() == second.read_bytes()
    assert first.read_bytes() != other.read_bytes()


def test_simulate_seed_from_environment(capsys, tmp_path, monkeypatch):
    flag = _simulate(capsys, tmp_path, "flag", "--seed", "5")
    monkeypatch.setenv("STABLEFLUCT_SEED", "5")
    env = _simulate(capsys, tmp_path, "env")
    assert flag.read_bytes() == env.read_bytes()


def test_bad_seed_environment(capsys, monkeypatch):
    monkeypatch.setenv("STABLEFLUCT_SEED", "abc")
    code, _, err = _run(capsys, "simulate", "--experiment", "survival", *CAUCHY, "--x", "2,0", "--n", "100")
    assert code == cli.EXIT_USAGE
    assert "STABLEFLUCT_SEED" in err


def test_simulate_rejects_small_n(capsys):
    code, _, err = _run(capsys, "simulate", "--experiment", "survival", *CAUCHY, "--x", "2,0", "--r", "1", "--n", "50")
    assert code == cli.EXIT_USAGE
    assert "n >= 100" in err


def test_round_floats():
    assert cli.round_floats({"a": [1.0 / 3.0, True, None, 2]}) == {"a": [0.333333333, True, None, 2]}


@pytest.mark.slow
def test_simulate_workers_live_in_the_manifest(capsys, tmp_path):
    out = _simulate(capsys, tmp_path, "pooled", "--seed", "3", "--workers", "2")
    header = next(csv.reader(io.StringIO(out.read_text())))
    assert "workers" not in header
    manifest = json.loads((tmp_path / "pooled.csv.manifest.json").read_text())
    assert manifest["config"]["workers"] == 2


def test_simulation_row_has_no_workers_field():
    assert "workers" not in SimulationRow.model_fields
