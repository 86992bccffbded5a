# dataset/score_aggregator.py

import logging
from typing import Dict, Iterable, List

from exceptions import NoResponses
from .records import SegmentScore, SurveyDataset, rescale

logger = logging.getLogger(__name__)


def score_from_likert(segment_id: str, values: Iterable[int]) -> SegmentScore:
    """Mean PSVF of a set of Likert answers. Integer sum, then one division."""
    values = list(values)
    if not values:
        raise NoResponses(segment_id)
    mean_psvf = sum(values) / len(values)
    return SegmentScore(
        segment_id=segment_id,
        n_responses=len(values),
        mean_psvf=mean_psvf,
        unit_score=rescale(mean_psvf),
    )


def segment_mean(dataset: SurveyDataset, segment_id: str) -> SegmentScore:
    """
    Averages the valid responses of one segment.

    Args:
        dataset: a (normally filtered) SurveyDataset.
        segment_id: the segment to score.

    Returns:
        SegmentScore with the mean on [-2, 2] and its [0, 1] rescaling.
    """
    if segment_id not in dataset.segment_index:
        raise NoResponses(segment_id)
    responses = dataset.responses_by_segment.get(segment_id, [])
    return score_from_likert(segment_id, (r.likert for r in responses))


def all_scores(dataset: SurveyDataset) -> List[SegmentScore]:
    """One score per segment with at least one response, ordered by segment_id."""
    scores = []
    skipped = 0
    for segment in dataset.segments:
        if segment.segment_id not in dataset.responses_by_segment:
            skipped += 1
            continue
        scores.append(segment_mean(dataset, segment.segment_id))
    if skipped:
        logger.warning("%d segments have no valid responses and are left out", skipped)
    return scores


def score_targets(scores: Iterable[SegmentScore]) -> Dict[str, float]:
    """segment_id -> unit_score, the regression targets."""
    return {s.segment_id: s.unit_score for s in scores}
