# dataset/survey_filter.py

import logging
from typing import Dict

from .records import SurveyDataset

logger = logging.getLogger(__name__)


def filter_valid(dataset: SurveyDataset) -> SurveyDataset:
    """
    Applies the survey validity rules.

    Responses where the participant recognized the singer are dropped, and
    participants who reported listening difficulties are dropped together
    with all of their responses. Segments are always kept, even when no
    response survives. Already-filtered data passes through unchanged.
    """
    excluded = {p.participant_id for p in dataset.participants if p.reported_difficulty}
    participants = tuple(p for p in dataset.participants if not p.reported_difficulty)
    responses = tuple(
        r
        for r in dataset.responses
        if not r.recognized_singer and r.participant_id not in excluded
    )

    dropped = len(dataset.responses) - len(responses)
    if excluded or dropped:
        logger.info(
            "Filtered %d participants with reported difficulties and %d responses",
            len(excluded),
            dropped,
        )
    return SurveyDataset(
        segments=dataset.segments, participants=participants, responses=responses
    )


def dataset_summary(dataset: SurveyDataset) -> Dict[str, int]:
    """Counts used by the ingestion integrity report."""
    answered = {r.segment_id for r in dataset.responses}
    return {
        "segments": len(dataset.segments),
        "songs": len({s.song_id for s in dataset.segments}),
        "participants": len(dataset.participants),
        "responses": len(dataset.responses),
        "recognized_responses": sum(r.recognized_singer for r in dataset.responses),
        "difficulty_participants": sum(
            p.reported_difficulty for p in dataset.participants
        ),
        "segments_without_responses": len(dataset.segments) - len(answered),
    }
