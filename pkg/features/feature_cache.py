# features/feature_cache.py
"""
On-disk log-mel cache, one file per segment:

    magic b"PSVFMEL1" | frames u32 | n_mels u32 | frames*n_mels little-endian float32
"""

from pathlib import Path
import re
import struct
from typing import Union

import numpy as np

from exceptions import FeatureError

MAGIC = b"PSVFMEL1"
_HEADER = struct.Struct("<8sII")
_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def cache_path(cache_dir: Union[str, Path], segment_id: str) -> Path:
    return Path(cache_dir) / (_UNSAFE.sub("_", segment_id) + ".mel")


def save_matrix(path: Union[str, Path], matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    frames, n_mels = matrix.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("wb") as f:
        f.write(_HEADER.pack(MAGIC, frames, n_mels))
        f.write(matrix.tobytes())
    tmp.replace(path)


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    """Returns the cached frames x n_mels float32 matrix."""
    try:
        payload = Path(path).read_bytes()
    except OSError as e:
        raise FeatureError(f"Cannot read feature cache {path}: {e}") from e
    if len(payload) < _HEADER.size:
        raise FeatureError(f"Feature cache {path} is truncated")
    magic, frames, n_mels = _HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise FeatureError(f"{path} is not a feature cache file")
    expected = _HEADER.size + frames * n_mels * 4
    if len(payload) != expected:
        raise FeatureError(f"Feature cache {path} has {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<f4", offset=_HEADER.size)
    return data.reshape(frames, n_mels).astype(np.float32)
