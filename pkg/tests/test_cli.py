import json
import os

import jsonschema
import numpy as np
import pytest

from coporeg import parse_problem, serialize_matrix, serialize_problem
from coporeg.cli import (REPORT_SCHEMA, build_report, ledger_from_report,
                         main, regularized_from_report)
from coporeg.config import DEFAULT
from coporeg.regularize import verify_ledger

from conftest import fixture_path


@pytest.fixture()
def workdir(tmp_path, e2, e3, e4, horn):
    paths = {}
    for name, prog in (("e1", parse_problem(open(fixture_path("e1.json"), "rb").read())),
                       ("e2", e2), ("e3", e3), ("e4", e4)):
        p = tmp_path / f"{name}.json"
        p.write_bytes(serialize_problem(prog))
        paths[name] = str(p)
    hp = tmp_path / "horn.json"
    hp.write_bytes(serialize_matrix(horn))
    paths["horn"] = str(hp)
    w = tmp_path / "w_e3.json"
    w.write_text(json.dumps({"p": 2, "W": [[0.5, 0.5]]}))
    paths["w_e3"] = str(w)
    paths["dir"] = str(tmp_path)
    return paths


def test_regularize_writes_report(workdir, capsys):
    out = os.path.join(workdir["dir"], "rep.json")
    rc = main(["regularize", "--problem", workdir["e2"], "--out", out])
    assert rc == 0
    assert "m_star: 1" in capsys.readouterr().out
    report = json.load(open(out))
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["status"] == "regularized"
    assert report["m_star"] == 1
    it = report["iterations"][0]
    assert np.allclose(it["tau"], [[1.0, 0.0]])
    assert it["L"] == [[1]]
    assert it["gamma"] == [pytest.approx(1.0)]
    assert np.allclose(it["Y"], [[1.0, 0.0], [0.0, 0.0]])
    assert report["regularized"]["ineq_rows"] == [[1, 2]]
    assert report["tolerances"]["tol_cert"] == DEFAULT.tol_cert


def test_regularize_regular_status(workdir, capsys):
    rc = main(["regularize", "--problem", workdir["e1"]])
    assert rc == 0
    assert "status: regular" in capsys.readouterr().out


def test_check_copositive_horn(workdir, capsys):
    rc = main(["check-copositive", "--matrix", workdir["horn"]])
    assert rc == 0
    assert "copositive, margin 0.0" in capsys.readouterr().out


def test_check_copositive_witness(workdir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_bytes(serialize_matrix(np.array([[0.0, -1.0], [-1.0, 0.0]])))
    rc = main(["check-copositive", "--matrix", str(bad)])
    assert rc == 0
    assert "not copositive" in capsys.readouterr().out


def test_missing_file_is_domain_error(workdir, capsys):
    rc = main(["regularize", "--problem", os.path.join(workdir["dir"], "nope.json")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(workdir, capsys):
    rc = main(["regularize", "--problem", workdir["e2"], "--frobnicate"])
    assert rc == 2
    capsys.readouterr()


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 2
    capsys.readouterr()


def test_one_step_cli(workdir, capsys):
    out = os.path.join(workdir["dir"], "onestep.json")
    rc = main(["one-step", "--problem", workdir["e3"], "--W", workdir["w_e3"],
               "--out", out])
    assert rc == 0
    doc = json.load(open(out))
    assert doc["eq_rows"] == [[1, 1], [1, 2]]
    assert doc["margin"] >= 1e-6


def test_minimal_face_cli(workdir, capsys):
    rc = main(["minimal-face", "--problem", workdir["e3"], "--samples", "100"])
    assert rc == 0
    assert "M = [1, 2]" in capsys.readouterr().out


def test_equiv_check_cli(workdir, capsys):
    rc = main(["equiv-check", "--problem", workdir["e2"], "--samples", "150"])
    assert rc == 0
    assert "0 disagreements" in capsys.readouterr().out


def test_verify_ledger_cli_from_report(workdir, capsys):
    out = os.path.join(workdir["dir"], "rep4.json")
    assert main(["regularize", "--problem", workdir["e4"], "--out", out]) == 0
    rc = main(["verify-ledger", "--problem", workdir["e4"], "--report", out,
               "--samples", "100"])
    assert rc == 0
    assert "ledger ok" in capsys.readouterr().out


def test_report_round_trip_reconstruction(workdir, e4):
    out = os.path.join(workdir["dir"], "rt.json")
    assert main(["regularize", "--problem", workdir["e4"], "--out", out]) == 0
    report = json.load(open(out))
    entries = ledger_from_report(report, e4)
    assert len(entries) == len(report["iterations"]) == 2
    rep = verify_ledger(entries, e4, n_samples=100, seed=0)
    assert rep["ok"]
    reg = regularized_from_report(report, e4, DEFAULT)
    assert reg.omega_empty
    assert reg.margin == report["regularized"]["margin"]


def test_env_config_merges_under_flags(workdir, tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples": 17, "seed": 9}))
    monkeypatch.setenv("COPOREG_CONFIG", str(cfg))
    rc = main(["equiv-check", "--problem", workdir["e3"], "--samples", "60"])
    assert rc == 0
    assert "60 samples" in capsys.readouterr().out


def test_build_report_failed_status(e2):
    from coporeg import RegularizationResult
    res = RegularizationResult("failed", diagnostics={"reason": "test"})
    report = build_report(res, e2, DEFAULT)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["status"] == "failed"
