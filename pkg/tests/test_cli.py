import json
import subprocess
import sys

import pytest

from gradcalc.cli import CHECKS, ConfigError, RunConfig, load_model, main, read_model_dict, resolve_checks, run


def _su2_inline(flip=None):
    h = {"0": "0", "1": "-i/2", "-1": "i/2", "i": "1/2", "-i": "-1/2"}
    sig = [[["0", "1"], ["1", "0"]], [["0", "-i"], ["i", "0"]], [["1", "0"], ["0", "-1"]]]
    sc = []
    for I, J, K, s in [(0, 1, 2, 1), (0, 2, 1, -1), (1, 2, 0, 1), (1, 0, 2, -1), (2, 0, 1, 1), (2, 1, 0, -1)]:
        if flip == (I, J, K):
            s = -s
        sc.append([I, J, K, str(s)])
    return {"dim": 3, "rep_dim": 2, "rep_matrices": [[[h[x] for x in r] for r in m] for m in sig],
            "structure_constants": sc}


@pytest.fixture
def model_file(tmp_path):
    def write(d):
        p = tmp_path / "model.json"
        p.write_text(json.dumps(d))
        return str(p)
    return write


def test_list_checks(capsys):
    assert main(["--list-checks"]) == 0
    out = capsys.readouterr().out.split()
    assert "nilpotency" in out and "fock_axioms" in out


def test_unknown_check_rejected_before_work(capsys):
    assert main(["--model", "u1", "--check", "nilpotency,bogus"]) == 2
    assert "bogus" in capsys.readouterr().err
    with pytest.raises(ConfigError):
        resolve_checks(["bogus"])


def test_check_list_forms():
    assert resolve_checks(["all"]) == list(CHECKS)
    assert resolve_checks(["nilpotency,lie_algebra", "nilpotency"]) == ["nilpotency", "lie_algebra"]


def test_builtin_alias():
    fm = load_model("su2")
    assert fm.lie.name == "su2" and fm.lie.sc(0, 1, 2).constant_term() == 1


def test_missing_sector_key_defaults(model_file):
    path = model_file({"group": "u1", "dimension": 2})
    assert read_model_dict(path)["sectors_enabled"] == ["fermion", "gauge", "ghost"]
    assert load_model(path).sectors == frozenset({"fermion", "gauge", "ghost"})


def test_parse_error(model_file, tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["--model", str(p)]) == 2
    assert main(["--model", str(tmp_path / "missing.json")]) == 2
    assert main(["--model", model_file({"group": "u1", "colour": 3})]) == 2
    assert main(["--model", model_file({"group": "u1", "dimension": 3})]) == 2


def test_inline_jacobi_failure_rejected(model_file, capsys):
    d = {"group": dict(_su2_inline(), structure_constants=_su2_inline()["structure_constants"] + [[0, 0, 1, "1"], [0, 1, 0, "-1"]])}
    assert main(["--model", model_file(d), "--check", "nilpotency"]) == 2
    err = capsys.readouterr().err
    assert "lie.jacobi" in err and "triple" in err


def test_inline_su2_equals_builtin(model_file):
    fm = load_model(model_file({"group": _su2_inline(), "dimension": 2}))
    assert fm.lie.c == load_model("su2").lie.c


def test_nilpotency_u1_passes():
    rep = run(RunConfig("u1", ["nilpotency"]))
    assert rep["summary"] == {"pass": 1, "fail": 0, "skipped": 0, "total": 1}


def test_flipped_constant_fails_nilpotency(model_file, capsys):
    d = {"group": _su2_inline(flip=(0, 1, 2)), "dimension": 2, "validate_group": False}
    path = model_file(d)
    assert main(["--model", path, "--check", "nilpotency", "--report", "json"]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["checks"][0]["status"] == "fail"
    assert "S^2" in rep["checks"][0]["witness"]
    # without the escape hatch the same file is a configuration error
    d.pop("validate_group")
    assert main(["--model", model_file(d), "--check", "nilpotency"]) == 2


def test_sector_dependent_checks_skip(model_file):
    path = model_file({"group": "u1", "dimension": 2, "sectors_enabled": ["gauge"]})
    rep = run(RunConfig(path, ["ghost_exactness", "gauge_invariance"]))
    statuses = [c["status"] for c in rep["checks"]]
    assert statuses == ["skipped", "pass"]


def test_json_schema_and_metric_override(capsys):
    assert main(["--model", "u1", "--check", "lie_algebra", "--report", "json", "--metric", "constant"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["schema_version"] == 1
    assert rep["model"]["metric_mode"] == "constant"
    assert set(rep["checks"][0]) == {"name", "status", "results", "witness"}


def test_timings_opt_in(capsys):
    main(["--model", "u1", "--check", "lie_algebra", "--report", "json", "--timings"])
    assert "seconds" in json.loads(capsys.readouterr().out)["checks"][0]


def test_parallel_matches_serial():
    checks = ["lie_algebra", "nilpotency", "euler_lagrange_oracle", "dirac_projectors"]
    a = run(RunConfig("u1", checks, seed=3, jobs=1))
    b = run(RunConfig("u1", checks, seed=3, jobs=2))
    assert a == b


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.txt"
    proc = subprocess.run([sys.executable, "-m", "gradcalc.cli", "--model", "u1", "--check", "lie_algebra",
                           "-o", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.read_text().startswith("gradcalc report")
