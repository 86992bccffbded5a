# models/checkpoint.py
"""
Checkpoint file layout:

    b"PSVFCKPT" | version u32 | header_len u32 | header JSON (utf-8) | tensor data

The header holds the TdnnConfig, the frozen tensor names, training metadata and
a tensor directory (name, shape, offset, nbytes); offsets are relative to the
start of the tensor data, which is raw little-endian float32.
"""

from dataclasses import dataclass, field
import json
from pathlib import Path
import struct
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from config import TdnnConfig
from exceptions import CheckpointIoError, ShapeMismatch, VersionMismatch
from .tdnn import Parameters, expected_shapes, validate_parameters

MAGIC = b"PSVFCKPT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sII")


@dataclass
class Checkpoint:
    config: TdnnConfig
    params: Parameters
    metadata: Dict[str, Any] = field(default_factory=dict)
    version: int = FORMAT_VERSION


def save_checkpoint(ckpt: Checkpoint, path: Union[str, Path]) -> None:
    directory = []
    blobs = []
    offset = 0
    for name, tensor in ckpt.params.tensors.items():
        data = np.ascontiguousarray(tensor, dtype="<f4").tobytes()
        directory.append(
            {"name": name, "shape": list(tensor.shape), "offset": offset, "nbytes": len(data)}
        )
        blobs.append(data)
        offset += len(data)
    header = json.dumps(
        {
            "config": ckpt.config.model_dump(mode="json"),
            "frozen": sorted(ckpt.params.frozen),
            "metadata": ckpt.metadata,
            "tensors": directory,
        },
        sort_keys=True,
    ).encode("utf-8")

    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tmp.open("wb") as f:
            f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)))
            f.write(header)
            for blob in blobs:
                f.write(blob)
        tmp.replace(path)
    except OSError as e:
        raise CheckpointIoError(f"Cannot write checkpoint {path}: {e}") from e


def load_checkpoint(path: Union[str, Path], expected: Optional[TdnnConfig] = None) -> Checkpoint:
    """
    Reads a checkpoint and validates tensor shapes against its embedded config
    and, when given, against ``expected``. Nothing is returned on any failure.
    """
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointIoError(f"Cannot read checkpoint {path}: {e}") from e

    if len(payload) < _PREFIX.size:
        raise CheckpointIoError(f"Checkpoint {path} is truncated")
    magic, version, header_len = _PREFIX.unpack_from(payload)
    if magic != MAGIC:
        raise CheckpointIoError(f"{path} is not a checkpoint file")
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"Checkpoint {path} has format version {version}; this tool reads {FORMAT_VERSION}"
        )
    data_start = _PREFIX.size + header_len
    if len(payload) < data_start:
        raise CheckpointIoError(f"Checkpoint {path} is truncated inside its header")
    try:
        header = json.loads(payload[_PREFIX.size : data_start].decode("utf-8"))
        config = TdnnConfig.model_validate(header["config"])
    except (ValueError, KeyError, ValidationError) as e:
        raise CheckpointIoError(f"Checkpoint {path} has a corrupt header: {e}") from e

    tensors = {}
    try:
        for entry in header.get("tensors", []):
            start = data_start + entry["offset"]
            end = start + entry["nbytes"]
            if end > len(payload):
                raise CheckpointIoError(f"Checkpoint {path} is truncated in tensor {entry['name']}")
            shape = tuple(entry["shape"])
            if int(np.prod(shape)) * 4 != entry["nbytes"]:
                raise CheckpointIoError(f"Tensor {entry['name']} size does not match its shape")
            tensors[entry["name"]] = (
                np.frombuffer(payload[start:end], dtype="<f4").astype(np.float32).reshape(shape)
            )
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointIoError(f"Checkpoint {path} has a corrupt tensor directory: {e!r}") from e

    params = Parameters(tensors, frozenset(header.get("frozen", [])))
    validate_parameters(params, config)
    if expected is not None:
        want = expected_shapes(expected)
        have = expected_shapes(config)
        if want != have:
            diff = sorted(n for n in set(want) | set(have) if want.get(n) != have.get(n))
            raise ShapeMismatch(f"Checkpoint {path} does not fit the expected model: {diff}")
    return Checkpoint(config=config, params=params, metadata=header.get("metadata", {}), version=version)
