# training/synthetic.py
"""
Separable synthetic corpus: low harmonic tones labelled masculine, high ones
labelled feminine, with survey responses that average exactly to the target.
"""

from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from config import MelConfig
from dataset.records import (
    LANGUAGES,
    MAX_SEGMENTS_PER_SONG,
    PARTICIPANT_AGE_GROUPS,
    ParticipantMeta,
    Response,
    SegmentMeta,
    SINGER_AGE_GROUPS,
    SurveyDataset,
)
from dataset.survey_loader import export_dataset
from exceptions import InvalidInputError
from features.audio_loader import Waveform, extract_segment, write_wav
from features.feature_store import FeatureStore
from features.mel_processor import melspectrogram

logger = logging.getLogger(__name__)

LOW_F0 = 120.0
HIGH_F0 = 220.0
# Five answers per segment; means -1.6 and +1.6 rescale to 0.1 and 0.9.
LOW_ANSWERS = (-2, -2, -2, -1, -1)
HIGH_ANSWERS = (2, 2, 2, 1, 1)
SEGMENT_SECONDS = 3.0


@dataclass
class SyntheticCorpus:
    dataset: SurveyDataset
    songs: Dict[str, Waveform]
    sample_rate: int

    def segment_waveform(self, segment: SegmentMeta) -> Waveform:
        return extract_segment(self.songs[segment.song_id], segment.start_time, segment.duration)


def _tone(f0: float, seconds: float, rate: int, rng: np.random.Generator) -> np.ndarray:
    """Five-harmonic tone with vibrato, tremolo and a little white noise."""
    t = np.arange(int(round(seconds * rate))) / rate
    vibrato_rate = rng.uniform(4.5, 6.0)
    inst_freq = f0 * (1.0 + 0.02 * np.sin(2 * np.pi * vibrato_rate * t))
    phase = 2 * np.pi * np.cumsum(inst_freq) / rate
    tone = sum(np.sin(h * phase) / h for h in range(1, 6))
    tremolo = 1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(2.0, 4.0) * t + rng.uniform(0, 2 * np.pi))
    signal = tone * tremolo
    signal = 0.5 * signal / np.max(np.abs(signal))
    return signal + 0.01 * rng.standard_normal(len(t))


def build_corpus(
    n_songs: int = 200,
    seed: int = 0,
    sample_rate: int = 16000,
    n_participants: int = len(LOW_ANSWERS),
) -> SyntheticCorpus:
    """
    Builds ``n_songs`` songs of six 3-second segments each, alternating low
    (target 0.1) and high (target 0.9) classes.

    ``n_participants`` must be a multiple of five; every participant answers
    every segment.
    """
    if n_songs < 1 or n_participants < 1 or n_participants % len(LOW_ANSWERS):
        raise InvalidInputError("n_songs must be positive and n_participants a positive multiple of 5")
    rng = np.random.default_rng(seed)
    participants = [
        ParticipantMeta(
            participant_id=f"p{i:03d}",
            gender=("female", "male")[i % 2],
            age_group=PARTICIPANT_AGE_GROUPS[i % 3],
            languages=frozenset({LANGUAGES[i % len(LANGUAGES)]}),
        )
        for i in range(n_participants)
    ]

    segments, responses, songs = [], [], {}
    for song in range(n_songs):
        high = song % 2 == 1
        song_id = f"song{song:04d}"
        f0 = (HIGH_F0 if high else LOW_F0) * rng.uniform(0.97, 1.03)
        songs[song_id] = Waveform(
            samples=_tone(f0, MAX_SEGMENTS_PER_SONG * SEGMENT_SECONDS, sample_rate, rng).astype(
                np.float32
            ),
            sample_rate=sample_rate,
        )
        answers = HIGH_ANSWERS if high else LOW_ANSWERS
        for k in range(MAX_SEGMENTS_PER_SONG):
            segment_id = f"{song_id}_s{k}"
            segments.append(
                SegmentMeta(
                    segment_id=segment_id,
                    song_id=song_id,
                    singer_sex="female" if high else "male",
                    singer_age_group=SINGER_AGE_GROUPS[song % len(SINGER_AGE_GROUPS)],
                    language=LANGUAGES[song % len(LANGUAGES)],
                    start_time=k * SEGMENT_SECONDS,
                    duration=SEGMENT_SECONDS,
                    audio_ref=f"audio/{song_id}.wav",
                )
            )
            for i, participant in enumerate(participants):
                responses.append(
                    Response(
                        participant_id=participant.participant_id,
                        segment_id=segment_id,
                        likert=answers[i % len(answers)],
                    )
                )

    dataset = SurveyDataset(
        segments=tuple(segments), participants=tuple(participants), responses=tuple(responses)
    )
    return SyntheticCorpus(dataset=dataset, songs=songs, sample_rate=sample_rate)


def write_corpus(corpus: SyntheticCorpus, out_dir: Union[str, Path]) -> Path:
    """
    Writes the canonical dataset files plus ``audio/<song>.wav``.

    Audio references are relative to ``out_dir``, which is returned as the audio root.
    """
    out = Path(out_dir)
    for song_id, waveform in corpus.songs.items():
        write_wav(out / "audio" / f"{song_id}.wav", waveform)
    export_dataset(corpus.dataset, out)
    logger.info(
        "Wrote synthetic corpus: %d songs, %d segments to %s",
        len(corpus.songs),
        len(corpus.dataset.segments),
        out,
    )
    return out


def corpus_store(
    corpus: SyntheticCorpus, mel_config: MelConfig, cache_dir: Optional[Union[str, Path]] = None
) -> FeatureStore:
    """
    A FeatureStore preloaded with clean features of every segment.

    No audio is read, so it only serves runs with augmentation disabled.
    """
    store = FeatureStore(corpus.dataset.segments, mel_config, cache_dir=cache_dir)
    for segment in corpus.dataset.segments:
        clip = corpus.segment_waveform(segment)
        store.put(segment.segment_id, melspectrogram(clip, mel_config).matrix)
    return store
