import json
from pathlib import Path

import pytest

from crmkit import cli

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_sample_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    rc = run("sample", "--config", CONFIG_DIR / "gamma.json", "--seed", 42, "--out", out)
    assert rc == 0
    atoms = (out / "atoms.csv").read_text()
    assert atoms.startswith("component,location,weight\n")
    path_csv = (out / "path.csv").read_text()
    assert path_csv.startswith("t,value\n")
    assert len(path_csv.splitlines()) == 202
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "sample"
    assert manifest["seed"] == 42
    assert manifest["outputs"] == ["atoms.csv", "path.csv"]
    assert manifest["tail_mass"] == 0.0
    assert len(manifest["config_hash"]) == 64


def test_sample_replay_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("sample", "--config", CONFIG_DIR / "gamma.json", "--seed", 7, "--out", out) == 0
    assert (a / "atoms.csv").read_bytes() == (b / "atoms.csv").read_bytes()
    assert (a / "path.csv").read_bytes() == (b / "path.csv").read_bytes()


def test_sample_empty_base_header_only(tmp_path):
    rc = run("sample", "--config", CONFIG_DIR / "empty_base.json", "--seed", 1, "--out", tmp_path)
    assert rc == 0
    assert (tmp_path / "atoms.csv").read_text() == "component,location,weight\n"


def test_sample_zmax_flag_overrides_config(tmp_path):
    rc = run(
        "sample", "--config", CONFIG_DIR / "gamma.json",
        "--seed", 3, "--zmax", 0.5, "--out", tmp_path,
    )
    assert rc == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["z_max"] == 0.5


def test_sample_requires_some_zmax(tmp_path):
    cfg = {"components": [json.loads((CONFIG_DIR / "gamma.json").read_text())["components"][0]]}
    p = tmp_path / "no_zmax.json"
    p.write_text(json.dumps(cfg))
    assert run("sample", "--config", p, "--seed", 1, "--out", tmp_path) == 2


def test_sample_truncation_records_tail(tmp_path):
    rc = run(
        "sample", "--config", CONFIG_DIR / "pareto_series.json",
        "--seed", 5, "--truncation", 2, "--out", tmp_path,
    )
    assert rc == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["truncation_level"] == 2
    assert manifest["tail_mass"] == pytest.approx(0.4620981203732969)


def test_sample_bad_config_exits_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"components": [{"family": {"name": "gamma"}}]}')
    assert run("sample", "--config", p, "--seed", 1, "--out", tmp_path) == 2
    assert run("sample", "--config", tmp_path / "missing.json", "--seed", 1) == 2
    rc = run(
        "sample", "--config", CONFIG_DIR / "gamma.json",
        "--seed", 1, "--zmax", -1.0, "--out", tmp_path,
    )
    assert rc == 2


def test_verify_single_suite(tmp_path, capsys):
    rc = run("verify", "--suite", "conjugacy", "--out", tmp_path)
    assert rc == 0
    report = (tmp_path / "report.csv").read_text().splitlines()
    assert report[0] == "suite,check,observed,expected,tolerance,passed"
    assert all(line.endswith(",true") for line in report[1:])
    assert "conjugacy: PASS" in capsys.readouterr().out


def test_verify_emits_convergence_table(tmp_path):
    rc = run("verify", "--suite", "laplace", "--out", tmp_path)
    assert rc == 0
    table = (tmp_path / "laplace_convergence.csv").read_text().splitlines()
    assert table[0] == "n,estimate,se,oracle,gap"
    assert [row.split(",")[0] for row in table[1:]] == ["8", "32", "128", "512"]


def test_verify_failure_exits_1(tmp_path):
    # seed 0 breaks the monotone-gap property at the default replicate count
    rc = run("verify", "--suite", "laplace", "--seed", 0, "--out", tmp_path)
    assert rc == 1
    report = (tmp_path / "report.csv").read_text()
    assert ",false" in report


def test_verify_filter_restricts_rows(tmp_path):
    rc = run("verify", "--suite", "examples", "--out", tmp_path, "pareto-series")
    assert rc == 0
    rows = (tmp_path / "report.csv").read_text().splitlines()[1:]
    assert rows and all("pareto-series" in r for r in rows)


def test_posterior_uniform(tmp_path, capsys):
    rc = run(
        "posterior", "--config", CONFIG_DIR / "gamma_lognormal_prior.json",
        "--observations", CONFIG_DIR / "observations_lognormal.csv",
        "--out", tmp_path,
    )
    assert rc == 0
    post = json.loads((tmp_path / "posterior_config.json").read_text())
    # four observations of 1.0 shift the shape coordinate by n/2 = 2
    assert post["component"]["path"][0][0]["const"] == 4.0
    assert post["component"]["path"][1][0]["const"] == 3.0
    assert "shift" in (tmp_path / "diff.txt").read_text()


def test_posterior_per_atom(tmp_path):
    rc = run(
        "posterior", "--config", CONFIG_DIR / "beta_bernoulli_prior.json",
        "--observations", CONFIG_DIR / "observations_bernoulli.csv",
        "--mode", "per-atom", "--out", tmp_path,
    )
    assert rc == 0
    post = json.loads((tmp_path / "posterior_config.json").read_text())
    assert post["component"]["atom_overrides"] == [[0.5, [2.6, 2.4]]]
    diff = (tmp_path / "diff.txt").read_text()
    assert "(0.6, 1.4) -> (2.6, 2.4)" in diff


def test_posterior_empty_observations(tmp_path):
    obs = tmp_path / "none.csv"
    obs.write_text("location,value\n")
    rc = run(
        "posterior", "--config", CONFIG_DIR / "gamma_lognormal_prior.json",
        "--observations", obs, "--out", tmp_path,
    )
    assert rc == 0
    post = json.loads((tmp_path / "posterior_config.json").read_text())
    prior = json.loads((CONFIG_DIR / "gamma_lognormal_prior.json").read_text())
    assert post["component"] == prior["component"]
    assert "posterior equals prior" in (tmp_path / "diff.txt").read_text()


def test_posterior_bad_observations_exit_2(tmp_path):
    obs = tmp_path / "bad.csv"
    obs.write_text("loc,val\n1,2\n")
    rc = run(
        "posterior", "--config", CONFIG_DIR / "gamma_lognormal_prior.json",
        "--observations", obs, "--out", tmp_path,
    )
    assert rc == 2


def test_posterior_out_of_support_observation_exits_1(tmp_path):
    obs = tmp_path / "neg.csv"
    obs.write_text("location,value\n0.5,-3.0\n")
    rc = run(
        "posterior", "--config", CONFIG_DIR / "gamma_lognormal_prior.json",
        "--observations", obs, "--out", tmp_path,
    )
    assert rc == 1
