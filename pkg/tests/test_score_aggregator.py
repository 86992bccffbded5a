import pytest

from dataset import all_scores, score_targets, segment_mean
from dataset.score_aggregator import score_from_likert
from exceptions import NoResponses


def test_segment_means_of_fixture(survey):
    expected = {"a1": 1.5, "a2": -1.0, "b1": -1.5, "b2": 0.0}
    for segment_id, mean in expected.items():
        score = segment_mean(survey, segment_id)
        assert score.mean_psvf == mean
        assert score.unit_score == (mean + 2) / 4


def test_all_scores_sorted_with_counts(survey):
    scores = all_scores(survey)
    assert [s.segment_id for s in scores] == ["a1", "a2", "b1", "b2"]
    assert [s.n_responses for s in scores] == [2, 2, 2, 1]
    assert score_targets(scores) == {"a1": 0.875, "a2": 0.25, "b1": 0.125, "b2": 0.5}


@pytest.mark.parametrize(
    "values, mean, unit",
    [
        ([2, 2, 2, 2, 2], 2.0, 1.0),
        ([-2], -2.0, 0.0),
        ([1, -1], 0.0, 0.5),
        ([2, 2, 2, 1, 1], 1.6, 0.9),
    ],
)
def test_score_from_likert(values, mean, unit):
    score = score_from_likert("s", values)
    assert score.mean_psvf == pytest.approx(mean)
    assert score.unit_score == pytest.approx(unit)
    assert 0.0 <= score.unit_score <= 1.0


def test_no_responses():
    with pytest.raises(NoResponses):
        score_from_likert("s", [])


def test_segment_without_valid_responses_is_left_out(survey):
    from dataset import SurveyDataset

    only_a = SurveyDataset(
        segments=survey.segments,
        participants=survey.participants,
        responses=tuple(r for r in survey.responses if r.segment_id.startswith("a")),
    )
    with pytest.raises(NoResponses):
        segment_mean(only_a, "b1")
    assert [s.segment_id for s in all_scores(only_a)] == ["a1", "a2"]
