# training/folds.py

from dataclasses import dataclass
import logging
from typing import Dict, Iterable, List, Mapping

import numpy as np

from exceptions import TooFewSongs, TrainingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: Dict[str, int]
    seed: int

    def songs(self, fold: int) -> List[str]:
        return sorted(s for s, f in self.assignments.items() if f == fold)

    def sizes(self) -> List[int]:
        return [len(self.songs(f)) for f in range(self.k)]


@dataclass(frozen=True)
class FoldSplit:
    train: List[str]
    val: List[str]
    test: List[str]


def make_folds(songs: Iterable[str], k: int = 5, seed: int = 0) -> FoldPlan:
    """
    Assigns songs to k folds uniformly at random; fold sizes differ by at most one song.

    The song list is sorted first, so the plan depends only on the song set and the seed.
    """
    unique = sorted(set(songs))
    if len(unique) < k:
        raise TooFewSongs(f"{len(unique)} songs cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    shuffled = [unique[i] for i in rng.permutation(len(unique))]
    assignments = {}
    for fold, chunk in enumerate(np.array_split(np.arange(len(shuffled)), k)):
        for i in chunk:
            assignments[shuffled[int(i)]] = fold
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def segments_by_song(segment_songs: Mapping[str, str]) -> Dict[str, List[str]]:
    """segment_id -> song_id mapping inverted to song_id -> sorted segment ids."""
    grouped: Dict[str, List[str]] = {}
    for segment_id, song_id in segment_songs.items():
        grouped.setdefault(song_id, []).append(segment_id)
    return {song: sorted(ids) for song, ids in grouped.items()}


def split_fold(
    plan: FoldPlan,
    song_segments: Mapping[str, List[str]],
    fold: int,
    validation_fraction: float = 0.1,
) -> FoldSplit:
    """
    Test set = the fold's songs; validation = a random share of the remaining
    songs (by song, rounded half-up); train = the rest. Returned ids are sorted.
    """
    if not 0 <= fold < plan.k:
        raise TrainingError(f"Fold {fold} out of range for k={plan.k}")
    test_songs = set(plan.songs(fold))
    remaining = sorted(s for s in plan.assignments if s not in test_songs)
    n_val = int(np.floor(validation_fraction * len(remaining) + 0.5))
    rng = np.random.default_rng([plan.seed, fold])
    val_songs = {remaining[int(i)] for i in rng.permutation(len(remaining))[:n_val]}

    def collect(songs):
        return sorted(seg for song in songs for seg in song_segments.get(song, []))

    split = FoldSplit(
        train=collect(s for s in remaining if s not in val_songs),
        val=collect(val_songs),
        test=collect(test_songs),
    )
    logger.info(
        "Fold %d: %d train / %d val / %d test segments",
        fold,
        len(split.train),
        len(split.val),
        len(split.test),
    )
    return split
