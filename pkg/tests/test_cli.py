import json

import pytest

from fiberpoles.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fiber_one_sided(tmp_path, capsys):
    out = tmp_path / "x2.csv"
    code, stdout, _ = run(capsys, "fiber", "--phase", "x^2", "--region", "+:1,-:1", "--g", "1",
                          "--n", "1e5", "--seed", "7", "--out", str(out))
    assert code == 0
    summary = json.loads(stdout)
    assert summary["sides"] == ["+"]
    assert out.read_text().startswith("# {")


def test_fiber_two_sided_to_stdout(capsys):
    code, stdout, _ = run(capsys, "fiber", "--phase", "x^2 - y^2", "--region", "all:1", "--n", "2e5")
    assert code == 0
    rows = stdout.splitlines()[2:]
    assert {r.split(",")[0] for r in rows} == {"+", "-"}


def test_missing_phase_is_usage_error(capsys):
    assert run(capsys, "fiber", "--n", "10")[0] == 2
    assert run(capsys, "fiber", "--phase", "x^^2")[0] == 2


def test_mellin_cube_oracle(capsys):
    code, stdout, _ = run(capsys, "mellin", "--oracle", "--phase", "x^3", "--region", "all:1",
                          "--g", "1 + x + x^2 + x^3 + x^4 + x^5", "--nu-max", "2")
    assert code == 0
    locs = {p["location"] for p in json.loads(stdout)["poles"]}
    assert locs == {"-1/3", "-2/3", "-4/3", "-5/3"}  # nothing at -1, -2


def test_mellin_bump_and_bad_csv(tmp_path, capsys):
    code, stdout, _ = run(capsys, "mellin", "--builtin", "bump")
    assert code == 0 and json.loads(stdout)["poles"] == []
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,table\n")
    assert run(capsys, "mellin", "--samples", str(bad))[0] == 2


def test_mellin_from_samples(tmp_path, capsys):
    out = tmp_path / "s.csv"
    run(capsys, "fiber", "--phase", "x^2", "--n", "1e6", "--seed", "1", "--out", str(out))
    code, stdout, _ = run(capsys, "mellin", "--samples", str(out), "--candidates", "auto", "--nu-max", "1")
    rec = json.loads(stdout)
    assert code == 0
    [p] = rec["poles"]
    assert p["location"] == "-1/2"
    assert p["principal_parts"][0][0] == pytest.approx(1.0, rel=0.02)


def test_cycle_examples(capsys):
    code, stdout, _ = run(capsys, "cycle", "--k", "2", "--region", "+:1,-:1")
    rep = json.loads(stdout)
    assert code == 0 and rep["components"]["0"]["zero"] and not rep["components"]["1/2"]["zero"]
    rep = json.loads(run(capsys, "cycle", "--k", "3", "--region", "+:1,-:1", "--hat")[1])
    assert rep["kind"] == "gamma_hat" and rep["components"]["0"]["zero"]
    rep = json.loads(run(capsys, "cycle", "--k", "2", "--region", "")[1])
    assert all(v["zero"] for v in rep["components"].values())


def test_spectrum(capsys):
    code, stdout, _ = run(capsys, "spectrum", "--exponents", "3,2")
    assert code == 0 and set(json.loads(stdout)["lattice"]) == {"1/6", "5/6"}
    assert run(capsys, "spectrum", "--exponents", "3,x")[0] == 2


def test_oscillate_and_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"phase": "x^2", "oscillate": {"tau": "10,100"}}))
    code, stdout, _ = run(capsys, "--config", str(cfg), "oscillate")
    lines = stdout.splitlines()
    assert code == 0 and lines[0] == "tau,re,im,pred_re,pred_im" and len(lines) == 3
    # the flag wins over the file
    code, stdout, _ = run(capsys, "--config", str(cfg), "oscillate", "--tau", "50")
    assert stdout.splitlines()[1].startswith("50.0,")


def test_verify_exit_codes(capsys):
    code, stdout, err = run(capsys, "verify", "lemma1")
    assert code == 0 and json.loads(stdout)["passed"] and "PASS" in err
    assert run(capsys, "verify", "detection-1d")[0] == 0
    assert run(capsys, "verify", "nonexistent")[0] == 2


def test_fiber_flags_boundary(tmp_path, capsys):
    out = str(tmp_path / "q.csv")
    rep = json.loads(run(capsys, "fiber", "--phase", "x^2 - y^2", "--region", "+0+:1", "--n", "1e4", "--out", out)[1])
    assert rep["boundary_at_origin"] is False
    rep = json.loads(run(capsys, "fiber", "--phase", "x^2 - y^2", "--n", "1e4", "--out", out)[1])
    assert rep["boundary_at_origin"] is True
