import pytest

from exceptions import TooFewSongs, TrainingError
from training import make_folds, segments_by_song, split_fold

SONGS = [f"song{i:03d}" for i in range(200)]
SONG_SEGMENTS = {song: [f"{song}_s{k}" for k in range(6)] for song in SONGS}


def test_two_hundred_songs_make_five_folds_of_forty():
    plan = make_folds(SONGS, k=5, seed=0)
    assert plan.sizes() == [40, 40, 40, 40, 40]
    assert sorted(plan.assignments) == SONGS


def test_unbalanced_song_count():
    plan = make_folds(SONGS[:14], k=5, seed=1)
    sizes = plan.sizes()
    assert sum(sizes) == 14
    assert max(sizes) - min(sizes) <= 1


def test_same_seed_same_plan_and_input_order_is_irrelevant():
    assert make_folds(SONGS, seed=3) == make_folds(list(reversed(SONGS)), seed=3)
    assert make_folds(SONGS, seed=3) != make_folds(SONGS, seed=4)


def test_too_few_songs():
    with pytest.raises(TooFewSongs):
        make_folds(SONGS[:4], k=5)


def test_default_split_sizes():
    plan = make_folds(SONGS, seed=0)
    split = split_fold(plan, SONG_SEGMENTS, 0)
    assert (len(split.train), len(split.val), len(split.test)) == (864, 96, 240)


def test_split_without_validation():
    plan = make_folds(SONGS, seed=0)
    split = split_fold(plan, SONG_SEGMENTS, 1, validation_fraction=0.0)
    assert (len(split.train), len(split.val), len(split.test)) == (960, 0, 240)


def test_split_is_a_song_level_partition():
    plan = make_folds(SONGS, seed=7)
    every_test = []
    for fold in range(5):
        split = split_fold(plan, SONG_SEGMENTS, fold)
        parts = [set(split.train), set(split.val), set(split.test)]
        assert set().union(*parts) == {s for segs in SONG_SEGMENTS.values() for s in segs}
        assert sum(len(p) for p in parts) == 1200
        songs_of = [{seg.rsplit("_", 1)[0] for seg in part} for part in parts]
        assert not (songs_of[0] & songs_of[1] or songs_of[0] & songs_of[2] or songs_of[1] & songs_of[2])
        every_test.extend(split.test)
    assert sorted(every_test) == sorted(s for segs in SONG_SEGMENTS.values() for s in segs)


def test_fold_out_of_range():
    with pytest.raises(TrainingError):
        split_fold(make_folds(SONGS), SONG_SEGMENTS, 5)


def test_segments_by_song():
    assert segments_by_song({"b": "x", "a": "x", "c": "y"}) == {"x": ["a", "b"], "y": ["c"]}
