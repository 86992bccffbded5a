# dataset/records.py
"""Survey record types. All records are immutable; SurveyDataset validates integrity on construction."""

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple

from exceptions import IntegrityError

SINGER_SEXES = ("female", "male")
SINGER_AGE_GROUPS = ("20-34", "35-49", "50-64", "65+")
LANGUAGES = ("fr", "en", "sp", "man", "ge")
PARTICIPANT_GENDERS = ("female", "male", "other")
# A blank gender answer is counted with "other".
UNSPECIFIED_GENDER = "other"
PARTICIPANT_AGE_GROUPS = ("20-34", "35-49", "50-65", "65+")
LIKERT_VALUES = (-2, -1, 0, 1, 2)
MAX_SEGMENTS_PER_SONG = 6


@dataclass(frozen=True)
class SegmentMeta:
    segment_id: str
    song_id: str
    singer_sex: str
    singer_age_group: str
    language: str
    start_time: float = 0.0
    duration: float = 3.0
    audio_ref: Optional[str] = None
    stem_ref: Optional[str] = None


@dataclass(frozen=True)
class ParticipantMeta:
    participant_id: str
    gender: str
    age_group: str
    languages: FrozenSet[str] = frozenset()
    reported_difficulty: bool = False


@dataclass(frozen=True)
class Response:
    participant_id: str
    segment_id: str
    likert: int
    recognized_singer: bool = False


@dataclass(frozen=True)
class SegmentScore:
    segment_id: str
    n_responses: int
    mean_psvf: float
    unit_score: float


def rescale(mean_psvf: float) -> float:
    """Maps a mean on the [-2, 2] Likert scale onto [0, 1]."""
    return (mean_psvf + 2.0) / 4.0


@dataclass(frozen=True)
class SurveyDataset:
    """
    Segments, participants and responses with referential integrity.

    Records are stored sorted by id (responses by participant then segment) so
    that equality and every derived value are independent of source row order.
    """

    segments: Tuple[SegmentMeta, ...] = field(default_factory=tuple)
    participants: Tuple[ParticipantMeta, ...] = field(default_factory=tuple)
    responses: Tuple[Response, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(
            self, "segments", tuple(sorted(self.segments, key=lambda s: s.segment_id))
        )
        object.__setattr__(
            self,
            "participants",
            tuple(sorted(self.participants, key=lambda p: p.participant_id)),
        )
        object.__setattr__(
            self,
            "responses",
            tuple(
                sorted(self.responses, key=lambda r: (r.participant_id, r.segment_id))
            ),
        )
        self._validate()

    def _validate(self):
        seen_segments = set()
        songs = Counter()
        for seg in self.segments:
            if seg.segment_id in seen_segments:
                raise IntegrityError(
                    f"Duplicate segment_id {seg.segment_id!r}", key=seg.segment_id
                )
            seen_segments.add(seg.segment_id)
            if not seg.duration > 0:
                raise IntegrityError(
                    f"Segment {seg.segment_id!r} has non-positive duration",
                    key=seg.segment_id,
                )
            if seg.start_time < 0:
                raise IntegrityError(
                    f"Segment {seg.segment_id!r} has negative start_time",
                    key=seg.segment_id,
                )
            songs[seg.song_id] += 1
        for song_id, count in songs.items():
            if count > MAX_SEGMENTS_PER_SONG:
                raise IntegrityError(
                    f"Song {song_id!r} has {count} segments (max {MAX_SEGMENTS_PER_SONG})",
                    key=song_id,
                )

        seen_participants = set()
        for p in self.participants:
            if p.participant_id in seen_participants:
                raise IntegrityError(
                    f"Duplicate participant_id {p.participant_id!r}",
                    key=p.participant_id,
                )
            seen_participants.add(p.participant_id)

        seen_pairs = set()
        for r in self.responses:
            pair = (r.participant_id, r.segment_id)
            if pair in seen_pairs:
                raise IntegrityError(f"Duplicate response {pair}", key=pair)
            seen_pairs.add(pair)
            if r.participant_id not in seen_participants:
                raise IntegrityError(
                    f"Response references unknown participant {r.participant_id!r}",
                    key=r.participant_id,
                )
            if r.segment_id not in seen_segments:
                raise IntegrityError(
                    f"Response references unknown segment {r.segment_id!r}",
                    key=r.segment_id,
                )
            if r.likert not in LIKERT_VALUES:
                raise IntegrityError(
                    f"Likert value {r.likert} out of range for {pair}", key=pair
                )

    @cached_property
    def segment_index(self) -> Dict[str, SegmentMeta]:
        return {s.segment_id: s for s in self.segments}

    @cached_property
    def participant_index(self) -> Dict[str, ParticipantMeta]:
        return {p.participant_id: p for p in self.participants}

    @cached_property
    def responses_by_segment(self) -> Dict[str, List[Response]]:
        grouped: Dict[str, List[Response]] = {}
        for r in self.responses:
            grouped.setdefault(r.segment_id, []).append(r)
        return grouped

    def song_ids(self) -> List[str]:
        return sorted({s.song_id for s in self.segments})
