# analytics/correspondence_analyzer.py
"""Average Correspondence (AC) and Unsure rates over singer and participant subgroups."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import AnalyticsSettings
from dataset.records import SurveyDataset
from exceptions import AnalyticsError, EmptySubgroup
from .subgroups import (
    DEFAULT_CROSSTABS,
    PARTICIPANT_DIMS,
    SINGER_DIMS,
    SubgroupKey,
    participant_in,
    segment_in,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ACResult:
    key: SubgroupKey
    n_segments: int
    aligned: int
    ac_percent: Optional[float]


@dataclass(frozen=True)
class UnsureResult:
    key: SubgroupKey
    n_segments: int
    unsure: int
    unsure_percent: Optional[float]


@dataclass(frozen=True)
class CrossTab:
    """AC matrix: rows are participant values, columns are singer values."""

    participant_dim: str
    singer_dim: str
    participant_values: Tuple[str, ...]
    singer_values: Tuple[str, ...]
    n_participants: Tuple[int, ...]
    cells: Tuple[Tuple[ACResult, ...], ...]
    population: Tuple[ACResult, ...] = ()
    dropped_rows: Tuple[str, ...] = ()


@dataclass(frozen=True)
class AnalyticsReport:
    ac_tables: Tuple[CrossTab, ...] = ()
    unsure_table: Tuple[UnsureResult, ...] = ()
    provenance: Dict[str, object] = field(default_factory=dict)


def sex_alignment(mean_psvf: float, singer_sex: str, zero_aligned: bool = False) -> bool:
    """
    True when the sign of the mean matches the singer's sex (positive is feminine).

    A mean of exactly 0 is aligned with neither sex unless ``zero_aligned`` is set,
    in which case it is aligned with both.
    """
    if mean_psvf == 0:
        return zero_aligned
    if singer_sex == "female":
        return mean_psvf > 0
    if singer_sex == "male":
        return mean_psvf < 0
    raise AnalyticsError(f"Unknown singer sex {singer_sex!r}")


class _SurveyView:
    """Pandas view of a dataset shared by all cells of a cross table."""

    def __init__(self, dataset: SurveyDataset):
        self.dataset = dataset
        self.responses = pd.DataFrame(
            {
                "participant_id": [r.participant_id for r in dataset.responses],
                "segment_id": [r.segment_id for r in dataset.responses],
                "likert": pd.array([r.likert for r in dataset.responses], dtype="int64"),
            }
        )
        self._all_means = None

    def participants_of(self, participant_dim) -> List[str]:
        return [
            p.participant_id
            for p in self.dataset.participants
            if participant_in(p, participant_dim)
        ]

    def segment_means(self, participant_dim=None) -> pd.Series:
        """segment_id -> mean Likert, over the responses of the participant subgroup."""
        if participant_dim is None and self._all_means is not None:
            return self._all_means
        frame = self.responses
        if participant_dim is not None:
            frame = frame[frame["participant_id"].isin(self.participants_of(participant_dim))]
        grouped = frame.groupby("segment_id", sort=True)["likert"].agg(["sum", "count"])
        means = grouped["sum"].astype("float64") / grouped["count"].astype("float64")
        if participant_dim is None:
            self._all_means = means
        return means

    def segments_of(self, singer_dim) -> List[str]:
        if singer_dim is None:
            return [s.segment_id for s in self.dataset.segments]
        return [s.segment_id for s in self.dataset.segments if segment_in(s, singer_dim)]


def _correspondence(view: _SurveyView, key: SubgroupKey, settings: AnalyticsSettings) -> ACResult:
    means = view.segment_means(key.participant_dim)
    index = view.dataset.segment_index
    aligned = 0
    n_segments = 0
    for segment_id in view.segments_of(key.singer_dim):
        if segment_id not in means.index:
            continue
        n_segments += 1
        if sex_alignment(
            float(means[segment_id]),
            index[segment_id].singer_sex,
            zero_aligned=settings.zero_mean_aligned,
        ):
            aligned += 1
    percent = 100.0 * aligned / n_segments if n_segments else None
    return ACResult(key=key, n_segments=n_segments, aligned=aligned, ac_percent=percent)


def average_correspondence(
    dataset: SurveyDataset, key: SubgroupKey, settings: Optional[AnalyticsSettings] = None
) -> ACResult:
    """
    Percentage of a singer subgroup's segments whose mean PSVF sign matches the singer's sex.

    With a participant dimension in the key, segment means are recomputed from
    that participant subgroup's responses only. Segments without a qualifying
    response are left out of both numerator and denominator.
    """
    result = _correspondence(_SurveyView(dataset), key, settings or AnalyticsSettings())
    if result.n_segments == 0:
        raise EmptySubgroup(key)
    return result


def _is_unsure(mean: float, settings: AnalyticsSettings) -> bool:
    if settings.unsure_inclusive:
        return abs(mean) <= settings.unsure_threshold
    return abs(mean) < settings.unsure_threshold


def _unsure(view: _SurveyView, key: SubgroupKey, settings: AnalyticsSettings) -> UnsureResult:
    means = view.segment_means(None)
    n_segments = 0
    unsure = 0
    for segment_id in view.segments_of(key.singer_dim):
        if segment_id not in means.index:
            continue
        n_segments += 1
        if _is_unsure(float(means[segment_id]), settings):
            unsure += 1
    percent = 100.0 * unsure / n_segments if n_segments else None
    return UnsureResult(key=key, n_segments=n_segments, unsure=unsure, unsure_percent=percent)


def unsure_fraction(
    dataset: SurveyDataset, key: SubgroupKey, settings: Optional[AnalyticsSettings] = None
) -> UnsureResult:
    """Share of a singer subgroup's segments whose mean lies within the unsure band."""
    if key.participant_dim is not None:
        raise AnalyticsError("Unsure rates are defined over singer subgroups only")
    result = _unsure(_SurveyView(dataset), key, settings or AnalyticsSettings())
    if result.n_segments == 0:
        raise EmptySubgroup(key)
    return result


def _crosstab(
    view: _SurveyView, participant_dim: str, singer_dim: str, settings: AnalyticsSettings
) -> CrossTab:
    if participant_dim not in PARTICIPANT_DIMS:
        raise AnalyticsError(f"Unknown participant dimension {participant_dim!r}")
    if singer_dim not in SINGER_DIMS:
        raise AnalyticsError(f"Unknown singer dimension {singer_dim!r}")

    singer_values = SINGER_DIMS[singer_dim]
    answered = {r.participant_id for r in view.dataset.responses}
    rows, counts, kept, dropped = [], [], [], []
    for p_value in PARTICIPANT_DIMS[participant_dim]:
        members = [
            pid for pid in view.participants_of((participant_dim, p_value)) if pid in answered
        ]
        if not members:
            continue
        row = tuple(
            _correspondence(
                view,
                SubgroupKey((participant_dim, p_value), (singer_dim, s_value)),
                settings,
            )
            for s_value in singer_values
        )
        if settings.drop_incomplete_rows and any(c.n_segments == 0 for c in row):
            logger.info(
                "Participants %s=%s do not cover every %s subgroup; row not reported",
                participant_dim,
                p_value,
                singer_dim,
            )
            dropped.append(p_value)
            continue
        kept.append(p_value)
        counts.append(len(members))
        rows.append(row)

    population = tuple(
        _correspondence(view, SubgroupKey(None, (singer_dim, s_value)), settings)
        for s_value in singer_values
    )
    return CrossTab(
        participant_dim=participant_dim,
        singer_dim=singer_dim,
        participant_values=tuple(kept),
        singer_values=tuple(singer_values),
        n_participants=tuple(counts),
        cells=tuple(rows),
        population=population,
        dropped_rows=tuple(dropped),
    )


def crosstab(
    dataset: SurveyDataset,
    participant_dim: str,
    singer_dim: str,
    settings: Optional[AnalyticsSettings] = None,
) -> CrossTab:
    """
    AC for every (participant value, singer value) pair.

    Participant values without any responding participant are omitted. Cells
    with no qualifying segment carry ``ac_percent=None``; with
    ``drop_incomplete_rows`` the whole participant row is then left out.
    """
    return _crosstab(_SurveyView(dataset), participant_dim, singer_dim, settings or AnalyticsSettings())


def build_report(
    dataset: SurveyDataset,
    settings: Optional[AnalyticsSettings] = None,
    dims: Optional[Sequence[Tuple[str, str]]] = None,
    provenance: Optional[Dict[str, object]] = None,
) -> AnalyticsReport:
    """
    Builds the Table 1 style cross tables and the Table 2 style Unsure vector.

    Args:
        dataset: filtered SurveyDataset.
        settings: tie / unsure / coverage rules.
        dims: (participant dim, singer dim) pairs; defaults to gender x sex,
              age x age and language x language. When given, the Unsure vector
              is restricted to the singer dims named.
        provenance: extra entries (dataset hash, filter settings) for the report.
    """
    settings = settings or AnalyticsSettings()
    view = _SurveyView(dataset)
    pairs = tuple(dims) if dims else DEFAULT_CROSSTABS
    tables = tuple(_crosstab(view, p_dim, s_dim, settings) for p_dim, s_dim in pairs)

    singer_dims = list(SINGER_DIMS) if not dims else []
    for _, s_dim in pairs:
        if s_dim not in singer_dims:
            singer_dims.append(s_dim)
    unsure = tuple(
        _unsure(view, SubgroupKey(None, (s_dim, s_value)), settings)
        for s_dim in singer_dims
        for s_value in SINGER_DIMS[s_dim]
    )

    meta: Dict[str, object] = {"settings": settings.model_dump(mode="json")}
    meta.update(provenance or {})
    return AnalyticsReport(ac_tables=tables, unsure_table=unsure, provenance=meta)
