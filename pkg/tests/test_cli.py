import json
import subprocess
import sys

import pytest

from slicereg import cli

FAST = ["--sphere", "4", "--a-angles", "4", "--rule-radial", "48", "--rule-angular", "48"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def identity_file(tmp_path):
    path = tmp_path / "identity.json"
    path.write_text(json.dumps({"coeffs": [[0, 0, 0, 0], [1, 0, 0, 0]]}))
    return str(path)


@pytest.fixture
def half_file(tmp_path):
    path = tmp_path / "half.json"
    path.write_text(json.dumps({"coeffs": [[0, 0, 0, 0], [0.5, 0, 0, 0]]}))
    return str(path)


def test_norm_identity(identity_file, capsys):
    code, out, _ = run(["norm", "--p", "2", "--f", identity_file], capsys)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-6)


def test_norm_builtins(capsys):
    code, out, _ = run(["norm", "--p", "2", "--f", "constant:0.3,0.4,0,0", "--sphere", "4"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.5, abs=1e-12)
    code, out, _ = run(["norm", "--p", "3", "--f", "monomial:2", "--sphere", "4"], capsys)
    assert code == 0 and json.loads(out)["value"] > 0


def test_essnorm_half(half_file, capsys):
    code, out, _ = run(["essnorm", "--phi", half_file, *FAST], capsys)
    rep = json.loads(out)
    assert code == 0
    assert 0 <= rep["lower"] <= rep["upper"] < 0.05


def test_bloch_and_bmo(capsys):
    code, out, _ = run(["bloch", "--f", "identity", "--sphere", "4"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0, abs=1e-6)
    code, out, _ = run(["bmo", "--f", "constant:2", "--sphere", "2"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.0, abs=1e-12)


def test_compose_and_carleson(capsys):
    code, out, _ = run(["compose", "--phi", "mobius:0.5", "--f", "identity", *FAST], capsys)
    assert code == 1  # a Mobius map is not a polynomial self-map spec
    code, out, _ = run(["compose", "--phi", "constant:0.2", "--f", "identity", *FAST], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["compact_verdict"] == "compact-evidence"
    assert rep["besov_norm_of_composition"] == pytest.approx(0.2)
    code, out, _ = run(["carleson", "--phi", "identity", "--sphere", "2", "--rule-radial", "48",
                        "--rule-angular", "48"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["M2"] == 0.0 and rep["M"] == pytest.approx(rep["M1"])


@pytest.mark.parametrize("argv", [["bogus"], ["norm", "--p", "x"], ["norm", "--nope", "1"], []])
def test_usage_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 64 and out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "usage"


@pytest.mark.parametrize("argv", [
    ["norm", "--p", "0.5", "--f", "identity"],
    ["norm", "--p", "2"],
    ["essnorm", "--phi", "monomial:1", "--alpha", "-1"],
    ["compose", "--phi", "constant:0,0,1,0"],
    ["compose", "--phi", "constant:1.5"],
    ["norm", "--f", "monomial:-1"],
])
def test_domain_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert json.loads(err.strip())["error"] == "domain"


def test_io_errors(tmp_path, capsys):
    code, _, err = run(["norm", "--f", str(tmp_path / "missing.json")], capsys)
    assert code == 2 and json.loads(err.strip())["error"] == "io"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["norm", "--f", str(bad)], capsys)[0] == 2
    assert run(["norm", "--f", "identity", "--out", str(tmp_path / "no" / "dir.json")], capsys)[0] == 2


def test_out_files_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        argv = ["compose", "--phi", "monomial:2", "--f", "mobius:0.5", "--seed", "5", "--out", str(path), *FAST]
        assert run(argv, capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].with_suffix(".csv").read_bytes() == paths[1].with_suffix(".csv").read_bytes()
    assert paths[0].with_suffix(".csv").read_text().startswith("abs_a,angle,")


def test_verify_failure_exit(monkeypatch, capsys):
    from slicereg import verify
    monkeypatch.setattr(verify, "CHECKS", [verify.CHECKS[0]])
    assert run(["verify"], capsys)[0] == 0
    monkeypatch.setattr(verify, "CHECKS", [lambda rng: verify.Check("always fails", False, -1.0, "", 0.0)])
    code, _, err = run(["verify"], capsys)
    assert code == 3 and json.loads(err.strip())["error"] == "verify"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "slicereg", "norm", "--f", "identity", "--sphere", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["value"] == pytest.approx(1.0, abs=1e-6)
