import numpy as np
import pytest

from config import AugmentPolicy, MelConfig
from conftest import tone
from dataset import SegmentMeta
from exceptions import MissingFeatures
from features.audio_loader import Waveform, write_wav
from features.feature_cache import cache_path
from features.feature_store import FeatureStore


@pytest.fixture
def song_dir(tmp_path):
    write_wav(tmp_path / "song.wav", Waveform(tone(220.0, seconds=6.0), 16000))
    write_wav(tmp_path / "vox.wav", Waveform(tone(330.0, seconds=6.0), 16000))
    return tmp_path


def segments():
    return [
        SegmentMeta("s0", "song", "female", "20-34", "fr", 0.0, 3.0, "song.wav", "vox.wav"),
        SegmentMeta("s1", "song", "female", "20-34", "fr", 3.0, 3.0, "song.wav"),
        SegmentMeta("s2", "other", "male", "20-34", "fr", 0.0, 3.0),
    ]


def test_features_are_computed_then_cached(song_dir):
    cache = song_dir / "cache"
    store = FeatureStore(segments(), MelConfig(), audio_root=song_dir, cache_dir=cache)
    matrix = store.features("s0")
    assert matrix.shape == (298, 24)
    assert matrix.dtype == np.float32
    assert cache_path(cache, "s0").is_file()

    fresh = FeatureStore(segments(), MelConfig(), cache_dir=cache)
    assert np.array_equal(fresh.features("s0"), matrix)


def test_missing_audio(song_dir):
    store = FeatureStore(segments(), MelConfig(), audio_root=song_dir)
    with pytest.raises(MissingFeatures):
        store.features("s2")
    with pytest.raises(MissingFeatures):
        store.features("unknown")


def test_put_takes_precedence(song_dir):
    store = FeatureStore(segments(), MelConfig())
    store.put("s2", np.zeros((20, 24)))
    assert store.features("s2").shape == (20, 24)
    assert store.augmented("s2", AugmentPolicy(), epoch=1).shape == (20, 24)


def test_augmented_is_reproducible_per_epoch(song_dir):
    store = FeatureStore(segments(), MelConfig(), audio_root=song_dir)
    policy = AugmentPolicy(speed_factors=[0.9, 1.1], rng_seed=7)
    first = store.augmented("s0", policy, epoch=1)
    assert np.array_equal(first, store.augmented("s0", policy, epoch=1))
    frame_counts = {store.augmented("s0", policy, epoch=e).shape[0] for e in range(1, 20)}
    # 0.9 and 1.1 give 3.33 s and 2.73 s clips.
    assert frame_counts == {331, 271}


def test_populate_counts(song_dir):
    store = FeatureStore(segments(), MelConfig(), audio_root=song_dir)
    assert store.populate(["s0", "s1"]) == 2
