import textwrap

import numpy as np
import pytest

from config import BlockSpec, TdnnConfig
from dataset import filter_valid, ingest

SEGMENTS_CSV = """\
segment_id,song_id,singer_sex,singer_age_group,language,start_time,duration,audio_ref,stem_ref
a1,songA,female,20-34,fr,0.0,3.0,,
a2,songA,female,20-34,fr,3.0,3.0,,
b1,songB,male,35-49,en,0.0,3.0,,
b2,songB,male,35-49,en,3.0,3.0,,
"""

PARTICIPANTS_CSV = """\
participant_id,gender,age_group,languages,reported_difficulty
p1,female,20-34,fr,0
p2,male,35-49,en|fr,0
p3,female,50-65,fr,1
"""

# p2/b2 is a recognized singer and p3 reported difficulties: both are filtered out.
RESPONSES_CSV = """\
participant_id,segment_id,likert,recognized_singer
p1,a1,2,0
p1,a2,-1,0
p1,b1,-2,0
p1,b2,0,0
p2,a1,Rather feminine,0
p2,a2,rather masculine,0
p2,b1,-1,0
p2,b2,1,1
p3,a1,-2,0
p3,b1,2,0
"""


def write_canonical(directory, segments=SEGMENTS_CSV, participants=PARTICIPANTS_CSV, responses=RESPONSES_CSV):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "segments.csv").write_text(textwrap.dedent(segments), encoding="utf-8")
    (directory / "participants.csv").write_text(textwrap.dedent(participants), encoding="utf-8")
    (directory / "responses.csv").write_text(textwrap.dedent(responses), encoding="utf-8")
    return directory


@pytest.fixture
def survey_dir(tmp_path):
    return write_canonical(tmp_path / "survey")


@pytest.fixture
def raw_survey(survey_dir):
    return ingest(survey_dir)


@pytest.fixture
def survey(raw_survey):
    return filter_valid(raw_survey)


@pytest.fixture
def tiny_model_cfg():
    return TdnnConfig(
        blocks=[
            BlockSpec(in_channels=24, out_channels=6, kernel=3, dilation=1),
            BlockSpec(in_channels=6, out_channels=5, kernel=3, dilation=2),
            BlockSpec(in_channels=5, out_channels=4, kernel=1, dilation=1),
        ],
        embed_dim=3,
        frozen_blocks=0,
        experimental=True,
    )


@pytest.fixture
def random_mel():
    def build(frames=40, seed=0):
        return np.random.default_rng(seed).standard_normal((frames, 24))

    return build


def tone(freq, seconds=1.0, rate=16000, amplitude=0.5):
    t = np.arange(int(round(seconds * rate))) / rate
    return (amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32)
