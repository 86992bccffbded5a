# analytics/subgroups.py

from dataclasses import dataclass
from typing import Optional, Tuple

from dataset.records import (
    LANGUAGES,
    PARTICIPANT_AGE_GROUPS,
    PARTICIPANT_GENDERS,
    SINGER_AGE_GROUPS,
    SINGER_SEXES,
    ParticipantMeta,
    SegmentMeta,
)
from exceptions import AnalyticsError

PARTICIPANT_DIMS = {
    "gender": PARTICIPANT_GENDERS,
    "age_group": PARTICIPANT_AGE_GROUPS,
    "language": LANGUAGES,
}
SINGER_DIMS = {
    "sex": SINGER_SEXES,
    "age_group": SINGER_AGE_GROUPS,
    "language": LANGUAGES,
}

# Default cross tables: (participant dim, singer dim).
DEFAULT_CROSSTABS = (("gender", "sex"), ("age_group", "age_group"), ("language", "language"))

DimValue = Tuple[str, str]


@dataclass(frozen=True)
class SubgroupKey:
    participant_dim: Optional[DimValue] = None
    singer_dim: Optional[DimValue] = None

    def __post_init__(self):
        if self.participant_dim is None and self.singer_dim is None:
            raise AnalyticsError("A subgroup key needs a participant or a singer dimension")
        if self.participant_dim is not None:
            _check(self.participant_dim, PARTICIPANT_DIMS, "participant")
        if self.singer_dim is not None:
            _check(self.singer_dim, SINGER_DIMS, "singer")

    def __str__(self):
        parts = []
        if self.participant_dim:
            parts.append("participants %s=%s" % self.participant_dim)
        if self.singer_dim:
            parts.append("singers %s=%s" % self.singer_dim)
        return "; ".join(parts)


def _check(dim_value, dims, side):
    dim, value = dim_value
    if dim not in dims:
        raise AnalyticsError(f"Unknown {side} dimension {dim!r}; expected one of {list(dims)}")
    if value not in dims[dim]:
        raise AnalyticsError(f"{value!r} is not a {side} {dim} value; expected {list(dims[dim])}")


def participant_in(participant: ParticipantMeta, dim_value: DimValue) -> bool:
    """Language is multi-valued: a participant belongs to every language they listed."""
    dim, value = dim_value
    if dim == "gender":
        return participant.gender == value
    if dim == "age_group":
        return participant.age_group == value
    return value in participant.languages


def segment_in(segment: SegmentMeta, dim_value: DimValue) -> bool:
    dim, value = dim_value
    if dim == "sex":
        return segment.singer_sex == value
    if dim == "age_group":
        return segment.singer_age_group == value
    return segment.language == value
