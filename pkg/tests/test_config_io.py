import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiwell.config import ExperimentConfig, from_dict, load_config
from multiwell.errors import ConfigError
from multiwell.grid import Grid
from multiwell.io import config_digest, read_csv, read_snapshots, write_csv, write_json, write_snapshots


def test_defaults_roundtrip(tmp_path):
    cfg = ExperimentConfig()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg
    assert load_config(None) == cfg


@pytest.mark.parametrize(
    "data",
    [
        {"version": 2},
        {"physics": {"hbar": -1}},
        {"physics": {"planck": 1}},
        {"potential": {"family": "tabulated"}},
        {"run": {"method": "rk4"}},
        {"sweep": {"physics.hbar": []}},
        {"seed": "x"},
        {"grid": 3},
        [],
    ],
)
def test_schema_violations(data):
    with pytest.raises(ConfigError):
        from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_replace():
    cfg = ExperimentConfig().replace("physics.hbar", 0.3)
    assert cfg.physics.hbar == 0.3
    assert cfg.replace("seed", 7).seed == 7
    with pytest.raises(ConfigError):
        cfg.replace("physics.h", 1.0)
    with pytest.raises(ConfigError):
        cfg.replace("nothing", 1.0)


def test_potential_blocks_build():
    assert ExperimentConfig().potential.build().n == 2
    cfg = from_dict({"potential": {"family": "polynomial-n-well", "n": 3}})
    assert cfg.potential.build().n == 3


def test_digest_stable_and_sensitive():
    a = ExperimentConfig().to_dict()
    assert config_digest(a) == config_digest(json.loads(json.dumps(a)))
    assert config_digest(a) != config_digest(ExperimentConfig(seed=1).to_dict())


@settings(max_examples=20, deadline=None)
@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=3, max_size=3), min_size=1, max_size=10))
def test_csv_roundtrip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "a.csv"
    write_csv(path, ["a", "b", "c"], rows, "abc")
    assert path.read_text().startswith("# config_digest: abc\n")
    header, data = read_csv(path)
    assert header == ["a", "b", "c"]
    np.testing.assert_array_equal(data, np.array(rows))


def test_json_embeds_digest(tmp_path):
    p = write_json(tmp_path / "s.json", {"x": np.float64(1.5), "z": 1 + 2j, "a": np.arange(2)}, "d1")
    body = json.loads(p.read_text())
    assert body == {"config_digest": "d1", "x": 1.5, "z": [1.0, 2.0], "a": [0, 1]}


def test_snapshots_roundtrip(tmp_path, rng):
    grid = Grid(4.0, 256)
    fields = rng.standard_normal((3, 256)) + 1j * rng.standard_normal((3, 256))
    p = write_snapshots(tmp_path / "f.bin", grid, [0.0, 0.5, 1.0], fields, "d2")
    header, data = read_snapshots(p)
    assert header["config_digest"] == "d2"
    assert header["grid"] == {"L": 4.0, "N": 256}
    np.testing.assert_array_equal(data, fields)
    (tmp_path / "junk.bin").write_bytes(b"notasnap" + bytes(16))
    with pytest.raises(ValueError):
        read_snapshots(tmp_path / "junk.bin")
