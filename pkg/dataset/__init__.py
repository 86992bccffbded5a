from .likert import parse_likert
from .records import (
    ParticipantMeta,
    Response,
    SegmentMeta,
    SegmentScore,
    SurveyDataset,
    rescale,
)
from .score_aggregator import all_scores, score_targets, segment_mean
from .survey_filter import dataset_summary, filter_valid
from .survey_loader import (
    dataset_fingerprint,
    export_dataset,
    ingest,
    load_column_map,
)

__all__ = [
    "ParticipantMeta",
    "Response",
    "SegmentMeta",
    "SegmentScore",
    "SurveyDataset",
    "all_scores",
    "dataset_fingerprint",
    "dataset_summary",
    "export_dataset",
    "filter_valid",
    "ingest",
    "load_column_map",
    "parse_likert",
    "rescale",
    "score_targets",
    "segment_mean",
]
