import json
import subprocess
import sys

import numpy as np
import pytest

from densecert.cli import main

E_MINUS_2 = '{"kind":"shifted","inner":{"kind":"e"},"offset":"-2"}'
SQRT2 = '{"kind":"nthroot","base":2,"degree":2}'


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, _ = run(argv, capsys)
    return code, json.loads(out)


def test_engel_example(capsys):
    code, obj = run_json(["engel", "--spec", E_MINUS_2, "--count", "5"], capsys)
    assert code == 0
    assert obj["digits"] == ["2", "3", "4", "5", "6"]
    assert obj["terminated"] is False
    assert obj["partial_sum"] == "517/720" and obj["bound"] == "1/720"
    assert obj["config"]["precision_budget_bits"] == "4096"


def test_engel_rational_terminates(capsys):
    code, obj = run_json(["engel", "--spec", "3/8", "--count", "10"], capsys)
    assert code == 0 and obj["digits"] == ["3", "8"] and obj["terminated"] and obj["bound"] == "0/1"


def test_engel_budget_exit_2_with_partial(capsys):
    code, obj = run_json(
        ["engel", "--precision-budget", "48", "--spec", '{"kind":"shifted","inner":' + SQRT2 + ',"offset":"-1"}', "--count", "50"],
        capsys,
    )
    assert code == 2 and obj["certified"] is False and obj["digits"][:3] == ["3", "5", "5"]


def test_witness_and_approx(capsys):
    code, obj = run_json(["witness", "--spec", SQRT2, "--eps", "1/1000"], capsys)
    assert code == 0
    r, s = int(obj["r"]), int(obj["s"])
    import mpmath

    assert 0 < r * mpmath.sqrt(2) + s < mpmath.mpf(1) / 1000
    code, obj = run_json(["approx", "--spec", SQRT2, "--target", "1/2", "--eps", "1/4"], capsys)
    assert code == 0 and (obj["m"], obj["n"]) == ("-8", "6")
    code, obj = run_json(["approx", "--spec", SQRT2, "--target", '{"kind":"e"}', "--eps", "1/1000000", "--strategy", "greedy"], capsys)
    assert code == 0
    assert abs(int(obj["m"]) + int(obj["n"]) * mpmath.sqrt(2) - mpmath.e) < 1e-6


def test_witness_rational_is_rejected(capsys):
    code, obj = run_json(["witness", "--spec", "3/8", "--eps", "1/1000"], capsys)
    assert code == 1 and obj["error"] == "degenerate termination"


def test_mulapprox(capsys):
    code, obj = run_json(["mulapprox", "-p", "2", "-q", "3", "--target", "10", "--eps", "1/10"], capsys)
    assert code == 0 and obj["certified"] is True
    from fractions import Fraction

    assert abs(Fraction(2) ** int(obj["m"]) * Fraction(3) ** int(obj["n"]) - 10) == Fraction(obj["err"]) < Fraction(1, 10)


def test_mulapprox_dependent(capsys):
    code, obj = run_json(["mulapprox", "-p", "2", "-q", "4", "--target", "5", "--eps", "1/10"], capsys)
    assert code == 1 and obj["reason"] == "dependent dilations"


def test_mulapprox_budget(capsys):
    code, obj = run_json(["--exponent-cap", "20", "mulapprox", "-p", "2", "-q", "3", "--target", "5", "--eps", "1/1000000000000"], capsys)
    assert code == 2 and obj["certified"] is False and "m" in obj


def test_certify_root_and_verify(tmp_path, capsys):
    out = tmp_path / "cert.json"
    code, obj = run_json(["certify-root", "-q", "2", "-n", "2", "-B", "1000000", "--out", str(out)], capsys)
    assert code == 0 and obj["certificate"]["k"] == "32"
    saved = json.loads(out.read_text())
    assert saved == obj["certificate"]
    assert out.read_text() == json.dumps(saved, sort_keys=True, separators=(",", ":")) + "\n"
    code, obj = run_json(["verify", str(out)], capsys)
    assert code == 0 and obj["verified"] is True
    saved["coeffs"][0] = str(int(saved["coeffs"][0]) + 1)
    out.write_text(json.dumps(saved))
    code, obj = run_json(["verify", str(out)], capsys)
    assert code == 1 and obj["verified"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["certify-e", "-B", "50"],
        ["certify-engel", "--spec", E_MINUS_2, "-B", "2"],
        ["certify-root", "-q", "5", "-n", "3", "-B", "100"],
    ],
)
def test_every_certificate_round_trips(tmp_path, capsys, argv):
    out = tmp_path / "c.json"
    code, _ = run_json(argv + ["--out", str(out)], capsys)
    assert code == 0
    code, obj = run_json(["verify", str(out)], capsys)
    assert code == 0 and obj["verified"]


def test_certify_failures(capsys):
    code, obj = run_json(["certify-root", "-q", "6", "-n", "2", "-B", "5"], capsys)
    assert code == 1 and obj["error"] == "primality failure"
    code, obj = run_json(["certify-engel", "--spec", "1/4", "-B", "3"], capsys)
    assert code == 1 and obj["error"] == "prefix too short"


def test_haar_check(capsys, tmp_path):
    code, obj = run_json(["haar-check", "--f", '{"kind":"hyperbola","c":"5"}', "-p", "2", "-q", "3", "--grid", "geom:1/4:16:16"], capsys)
    assert code == 0 and obj["verdict"] == "consistent-with-theorem"
    assert abs(float(obj["report"]["c"]) - 5) < 1e-6
    neg = '{"kind":"hyperbola_plus","c":"1","perturbation":{"kind":"cos_log","amp":0.2,"period":2}}'
    code, obj = run_json(["haar-check", "--f", neg, "-p", "2", "-q", "3"], capsys)
    assert code == 1 and obj["verdict"] == "violates-hypotheses"
    code, obj = run_json(["haar-check", "--f", '{"kind":"hyperbola","c":"5"}', "-p", "2", "-q", "4"], capsys)
    assert code == 1 and obj["error"] == "dependent dilations"
    code, obj = run_json(["haar-check", "--f", '{"kind":"hyperbola","c":"5"}', "-p", "2", "--grid", "1,2,7/2,10"], capsys)
    assert code == 0 and obj["verdict"] == "constant"
    # table ingested from CSV, path resolved relative to the JSON file
    (tmp_path / "f.csv").write_text("t,f\n" + "\n".join(f"{x!r},{5 / x!r}" for x in np.geomspace(0.1, 65, 20001).tolist()))
    spec = tmp_path / "f.json"
    spec.write_text(json.dumps({"kind": "table", "csv": "f.csv"}))
    code, obj = run_json(["haar-check", "--f", str(spec), "-p", "2", "--grid", "geom:1/4:16:8", "--tol", "1e-6"], capsys)
    assert code == 0 and obj["verdict"] == "constant"


def test_haar_check_inconclusive_exit_2(capsys):
    f = '{"kind":"hyperbola_plus","c":"1","perturbation":{"kind":"sin_log","amp":0.001,"freq":40}}'
    code, obj = run_json(["haar-check", "--f", f, "-p", "2", "--tol", "1e-30"], capsys)
    assert code == 2 and obj["verdict"] == "inconclusive"


def test_config_file_merge_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"precision_budget_bits": 2048, "exponent_cap": "500"}))
    code, obj = run_json(["engel", "--config", str(cfg), "--exponent-cap", "77", "--spec", "1/2", "--count", "1"], capsys)
    assert code == 0
    assert obj["config"] == {"precision_budget_bits": "2048", "exponent_cap": "77", "engel_depth_cap": "10000", "output": "json"}


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["engel", "--spec", E_MINUS_2],
        ["engel", "--spec", "not json", "--count", "3"],
        ["approx", "--spec", SQRT2, "--target", "1/2", "--eps", "-1/2"],
        ["engel", "--spec", "1/2", "--count", "0"],
        ["mulapprox", "-p", "2", "-q", "3", "--target", "0", "--eps", "1/10"],
        ["--precision-budget", "-5", "engel", "--spec", "1/2", "--count", "1"],
    ],
)
def test_usage_errors_exit_64(argv, capsys):
    with pytest.raises(SystemExit) as info:
        sys.exit(main(argv))
    assert info.value.code == 64
    assert capsys.readouterr().err


def test_plain_output(capsys):
    code, out, _ = run(["--output", "plain", "engel", "--spec", "3/8", "--count", "5"], capsys)
    assert code == 0 and "digits: 3 8" in out.splitlines()


def test_deterministic_bytes():
    argv = [sys.executable, "-m", "densecert.cli", "mulapprox", "-p", "2", "-q", "3", "--target", "5", "--eps", "1/1000"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["m"] == "500"
