import json
import struct

import numpy as np
import pytest

from config import TdnnConfig
from exceptions import CheckpointIoError, ShapeMismatch, VersionMismatch
from models.checkpoint import MAGIC, Checkpoint, load_checkpoint, save_checkpoint
from models.tdnn import init_parameters


@pytest.fixture
def checkpoint(tiny_model_cfg):
    return Checkpoint(
        config=tiny_model_cfg,
        params=init_parameters(tiny_model_cfg, seed=5),
        metadata={"fold": 2, "seed": 5, "best_epoch": 7},
    )


def test_round_trip_is_bit_exact(tmp_path, checkpoint):
    save_checkpoint(checkpoint, tmp_path / "model.ckpt")
    loaded = load_checkpoint(tmp_path / "model.ckpt")
    assert loaded.config == checkpoint.config
    assert loaded.metadata == checkpoint.metadata
    assert loaded.params.frozen == checkpoint.params.frozen
    assert list(loaded.params.tensors) == list(checkpoint.params.tensors)
    for name, tensor in checkpoint.params.tensors.items():
        assert loaded.params.tensors[name].tobytes() == tensor.tobytes()


def test_file_starts_with_magic_and_version(tmp_path, checkpoint):
    save_checkpoint(checkpoint, tmp_path / "model.ckpt")
    magic, version, _ = struct.unpack_from("<8sII", (tmp_path / "model.ckpt").read_bytes())
    assert (magic, version) == (MAGIC, 1)


def test_truncated_file(tmp_path, checkpoint):
    path = tmp_path / "model.ckpt"
    save_checkpoint(checkpoint, path)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(CheckpointIoError):
        load_checkpoint(path)
    with pytest.raises(CheckpointIoError):
        load_checkpoint(tmp_path / "missing.ckpt")


def test_unknown_version(tmp_path, checkpoint):
    path = tmp_path / "model.ckpt"
    save_checkpoint(checkpoint, path)
    payload = bytearray(path.read_bytes())
    struct.pack_into("<I", payload, 8, 99)
    path.write_bytes(bytes(payload))
    with pytest.raises(VersionMismatch):
        load_checkpoint(path)


def test_shape_mismatch_against_expected_config(tmp_path):
    small = TdnnConfig(embed_dim=32, experimental=True)
    path = tmp_path / "small.ckpt"
    save_checkpoint(Checkpoint(config=small, params=init_parameters(small, seed=0)), path)
    with pytest.raises(ShapeMismatch):
        load_checkpoint(path, expected=TdnnConfig())
    assert load_checkpoint(path).config.embed_dim == 32


def test_float64_parameters_are_stored_as_float32(tmp_path, tiny_model_cfg):
    params = init_parameters(tiny_model_cfg, seed=0, dtype=np.float64)
    save_checkpoint(Checkpoint(config=tiny_model_cfg, params=params), tmp_path / "m.ckpt")
    loaded = load_checkpoint(tmp_path / "m.ckpt")
    assert all(t.dtype == np.float32 for t in loaded.params.tensors.values())


def test_tensor_entry_without_offset_is_a_checkpoint_error(tmp_path, checkpoint):
    path = tmp_path / "model.ckpt"
    save_checkpoint(checkpoint, path)
    payload = path.read_bytes()
    _, version, header_len = struct.unpack_from("<8sII", payload)
    header = json.loads(payload[16 : 16 + header_len].decode("utf-8"))
    del header["tensors"][0]["offset"]
    new_header = json.dumps(header).encode("utf-8")
    path.write_bytes(
        struct.pack("<8sII", MAGIC, version, len(new_header)) + new_header + payload[16 + header_len :]
    )
    with pytest.raises(CheckpointIoError, match="tensor directory"):
        load_checkpoint(path)
