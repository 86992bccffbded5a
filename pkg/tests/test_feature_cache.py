import numpy as np
import pytest

from exceptions import FeatureError
from features.feature_cache import cache_path, load_matrix, save_matrix


def test_save_and_load_are_bit_exact(tmp_path):
    matrix = np.random.default_rng(0).standard_normal((298, 24)).astype(np.float32)
    path = cache_path(tmp_path, "song/1:seg")
    save_matrix(path, matrix)
    assert path.parent == tmp_path
    loaded = load_matrix(path)
    assert loaded.dtype == np.float32
    assert np.array_equal(loaded, matrix)


def test_truncated_and_foreign_files(tmp_path):
    path = tmp_path / "x.mel"
    save_matrix(path, np.ones((10, 24), dtype=np.float32))
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(FeatureError):
        load_matrix(path)
    path.write_bytes(b"NOTAMEL1" + bytes(8))
    with pytest.raises(FeatureError):
        load_matrix(path)
