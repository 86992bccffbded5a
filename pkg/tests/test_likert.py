import pytest

from dataset.likert import parse_likert
from exceptions import UnknownLabel


@pytest.mark.parametrize(
    "label, expected",
    [
        ("Definitely feminine", 2),
        ("rather feminine", 1),
        ("I don't know", 0),
        ("  RATHER MASCULINE ", -1),
        ("definitely masculine", -2),
        ("-2", -2),
        ("+1", 1),
        (0, 0),
    ],
)
def test_parse_likert_accepts_labels_and_integers(label, expected):
    assert parse_likert(label) == expected


@pytest.mark.parametrize("label", ["maybe", "3", "-3", "", None, 2.0, True])
def test_parse_likert_rejects_everything_else(label):
    with pytest.raises(UnknownLabel):
        parse_likert(label)
