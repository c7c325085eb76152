import json

import numpy as np
import pytest

from multiwell import cli
from multiwell.io import read_csv


def run(tmp_path, *args, config=None):
    argv = list(args)
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return cli.run(argv)


def summary(path):
    return json.loads((path / "summary.json").read_text())


def test_spectrum(tmp_path):
    out = tmp_path / "s"
    assert run(tmp_path, "spectrum", "--out", str(out)) == 0
    res = summary(out)["result"]
    assert len(res["eigenvalues"]) == 4
    assert res["agmon"][0] == pytest.approx(4 / 3)
    assert res["omega"] > 0
    assert res["hypothesis1"]["passed"]
    assert (out / "eigenvalues.csv").read_text().startswith("# config_digest: " + summary(out)["config_digest"])


def test_outputs_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run(tmp_path, "dnls-fit", "--out", str(tmp_path / d), "--seed", "3") == 0
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()


def test_simulate_dnls_linear(tmp_path):
    cfg = {"physics": {"eta": 0.0}, "run": {"state": "dnls:1,0", "tau_end": 3.0, "dtau": 0.001, "obs_stride": 10}}
    out = tmp_path / "d"
    assert run(tmp_path, "simulate-dnls", "--out", str(out), config=cfg) == 0
    header, data = read_csv(out / "dnls.csv")
    tau, p1 = data[:, header.index("tau")], data[:, header.index("p1")]
    # the Lowdin frame makes the scaled hopping -1, which leaves cos^2 unchanged
    np.testing.assert_allclose(p1, np.cos(tau) ** 2, atol=1e-6)


def test_simulate_gpe_and_compare(tmp_path):
    cfg = {"physics": {"eta": 1.0}, "run": {"beats": 1.0, "obs_stride": 20, "stride": 1000}}
    assert run(tmp_path, "simulate-gpe", "--out", str(tmp_path / "g"), config=cfg) == 0
    res = summary(tmp_path / "g")["result"]
    assert res["max_norm_error"] <= 1e-10
    assert (tmp_path / "g" / "fields.bin").exists()
    assert run(tmp_path, "compare", "--out", str(tmp_path / "c"), config=cfg) == 0
    assert summary(tmp_path / "c")["result"]["sup"] <= 0.05


def test_normal_form(tmp_path):
    cfg = {"physics": {"eps": 1e-3, "sigma": 1}, "normal_form": {"M": 6, "exact": True}}
    assert run(tmp_path, "normal-form", "--out", str(tmp_path / "n"), config=cfg) == 0
    rep = summary(tmp_path / "n")["result"]["exactness"]
    assert rep["coupling_terms"] == {"1": 0, "2": 0}


def test_sweep(tmp_path):
    cfg = {"sweep": {"physics.hbar": [0.2, 0.3]}}
    assert run(tmp_path, "sweep", "--task", "dnls-fit", "--threads", "2", "--out", str(tmp_path / "w"), config=cfg) == 0
    index = json.loads((tmp_path / "w" / "index.json").read_text())
    assert index["count"] == 2 and index["failed"] == 0
    assert [r["params"]["physics.hbar"] for r in index["runs"]] == [0.2, 0.3]
    assert (tmp_path / "w" / "run_001" / "summary.json").exists()


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUT, str(tmp_path / "env"))
    assert run(tmp_path, "dnls-fit") == 0
    assert (tmp_path / "env" / "summary.json").exists()


def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--out", str(tmp_path), config={"physics": {"hbar": -1}}) == 1
    assert run(tmp_path, "spectrum", "--out", str(tmp_path), config={"grid": {"L": 2.0}, "run": {"K": 200}}) == 2
    assert run(tmp_path, "acceptance", "--criteria", "13", "--out", str(tmp_path)) == 1
    assert "configuration error" in capsys.readouterr().err


def test_acceptance_subset(tmp_path):
    out = tmp_path / "acc"
    assert cli.run(["acceptance", "--criteria", "1", "--out", str(out)]) == 0
    body = json.loads((out / "acceptance.json").read_text())
    assert body["passed"] and body["criteria"][0]["criterion"] == 1


def test_acceptance_failure_exit_code(tmp_path):
    assert cli.run(["acceptance", "--criteria", "5", "--out", str(tmp_path)]) == 3
