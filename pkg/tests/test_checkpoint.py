import struct

import numpy as np
import pytest

from momentgraph.checkpoint import MAGIC, VERSION, load_params, save_params
from momentgraph.errors import CheckpointError


def test_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    params = {
        "a.w": rng.normal(size=(3, 4)),
        "a.b": rng.normal(size=(1, 4)),
        "z": rng.normal(size=(2, 2, 2)),
    }
    path = tmp_path / "model.ckpt"
    save_params(params, str(path))
    loaded = load_params(str(path))
    assert set(loaded) == set(params)
    for name, arr in params.items():
        assert loaded[name].shape == arr.shape
        assert loaded[name].tobytes() == arr.tobytes()


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOPE" + struct.pack("<I", VERSION))
    with pytest.raises(CheckpointError, match="magic"):
        load_params(str(path))


def test_bad_version(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(MAGIC + struct.pack("<I", 99))
    with pytest.raises(CheckpointError, match="version"):
        load_params(str(path))


def test_truncated_payload(tmp_path):
    path = tmp_path / "model.ckpt"
    save_params({"w": np.ones((4, 4))}, str(path))
    blob = path.read_bytes()
    path.write_bytes(blob[:-9])
    with pytest.raises(CheckpointError, match="truncated|corrupt"):
        load_params(str(path))


def test_deterministic_bytes(tmp_path):
    # sorted record order makes the file a pure function of its contents
    params = {"b": np.ones((2,)), "a": np.zeros((1, 3))}
    p1, p2 = tmp_path / "one.ckpt", tmp_path / "two.ckpt"
    save_params(params, str(p1))
    save_params(dict(reversed(list(params.items()))), str(p2))
    assert p1.read_bytes() == p2.read_bytes()
