# dataset/survey_loader.py
"""Reads and writes the canonical survey files (segments, participants, responses)."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

import pandas as pd
import yaml

from exceptions import InvalidInputError, ParseError, UnknownLabel
from .likert import parse_likert
from .records import (
    LANGUAGES,
    PARTICIPANT_AGE_GROUPS,
    PARTICIPANT_GENDERS,
    SINGER_AGE_GROUPS,
    SINGER_SEXES,
    UNSPECIFIED_GENDER,
    ParticipantMeta,
    Response,
    SegmentMeta,
    SurveyDataset,
)

logger = logging.getLogger(__name__)

SEGMENT_FIELDS = [
    "segment_id",
    "song_id",
    "singer_sex",
    "singer_age_group",
    "language",
    "start_time",
    "duration",
    "audio_ref",
    "stem_ref",
]
PARTICIPANT_FIELDS = [
    "participant_id",
    "gender",
    "age_group",
    "languages",
    "reported_difficulty",
]
RESPONSE_FIELDS = ["participant_id", "segment_id", "likert", "recognized_singer"]

CANONICAL_FILES = {
    "segments": "segments.csv",
    "participants": "participants.csv",
    "responses": "responses.csv",
}

# Values used when a column is absent from the source altogether.
_OPTIONAL_DEFAULTS = {
    "start_time": "0",
    "duration": "3.0",
    "audio_ref": "",
    "stem_ref": "",
    "languages": "",
    "reported_difficulty": "0",
    "recognized_singer": "0",
}

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}

PathsLike = Union[str, Path, Mapping[str, Union[str, Path]]]


def load_column_map(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    """
    Reads a column_map file (YAML or JSON).

    Expected shape::

        segments:     {segment_id: <source column>, ...}
        participants: {participant_id: <source column>, ...}
        responses:    {likert: <source column>, ...}
        values:       {language: {Mandarin: man}, singer_sex: {F: female}}
    """
    if path is None:
        return {}
    map_file = Path(path)
    if not map_file.is_file():
        raise InvalidInputError(f"Column map not found: {map_file}")
    try:
        loaded = yaml.safe_load(map_file.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise InvalidInputError(f"Cannot parse column map {map_file}: {e}") from e
    if not isinstance(loaded, dict):
        raise InvalidInputError(f"Column map {map_file} must be a mapping")
    return loaded


def _resolve_paths(paths: PathsLike) -> Dict[str, Path]:
    if isinstance(paths, (str, Path)):
        root = Path(paths)
        resolved = {}
        for kind, name in CANONICAL_FILES.items():
            candidate = root / name
            if not candidate.exists() and (root / name.replace(".csv", ".json")).exists():
                candidate = root / name.replace(".csv", ".json")
            resolved[kind] = candidate
    else:
        resolved = {kind: Path(paths[kind]) for kind in CANONICAL_FILES if kind in paths}
    for kind in CANONICAL_FILES:
        if kind not in resolved:
            raise InvalidInputError(f"No {kind} file given")
        if not resolved[kind].is_file():
            raise InvalidInputError(f"Input file not found: {resolved[kind]}")
    return resolved


def _read_table(path: Path) -> pd.DataFrame:
    """Reads delimited text or a JSON list of records into an all-string frame."""
    try:
        if path.suffix.lower() == ".json":
            with path.open("r", encoding="utf-8") as f:
                records = json.load(f)
            if not isinstance(records, list):
                raise ParseError(0, None, f"{path.name}: JSON must be a list of records")
            for record in records:
                for key, value in list(record.items()):
                    if isinstance(value, (list, tuple, set)):
                        record[key] = "|".join(str(v) for v in value)
                    elif value is None:
                        record[key] = ""
                    elif isinstance(value, bool):
                        record[key] = "1" if value else "0"
            frame = pd.DataFrame.from_records(records)
            return frame.fillna("").astype(str)
        sep = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
        return pd.read_csv(
            path, sep=sep, dtype=str, keep_default_na=False, encoding="utf-8"
        )
    except (ValueError, OSError, pd.errors.ParserError) as e:
        raise ParseError(0, None, f"{path.name}: {e}") from e


def _canonical_frame(
    frame: pd.DataFrame, fields: List[str], mapping: Mapping[str, str], source: str
) -> pd.DataFrame:
    columns = {}
    for name in fields:
        source_column = mapping.get(name, name)
        if source_column in frame.columns:
            columns[name] = frame[source_column].astype(str).str.strip()
        elif name in _OPTIONAL_DEFAULTS:
            columns[name] = pd.Series(
                [_OPTIONAL_DEFAULTS[name]] * len(frame), index=frame.index, dtype=str
            )
        else:
            raise ParseError(1, source_column, f"{source}: required column missing")
    return pd.DataFrame(columns)


class _RowParser:
    """Field converters that raise ParseError with the source line number."""

    def __init__(self, values: Mapping[str, Mapping[str, str]]):
        self.values = values or {}

    def _mapped(self, column: str, text: str) -> str:
        table = self.values.get(column, {})
        return str(table.get(text, text))

    def enum(self, row: int, column: str, text: str, allowed, blank: Optional[str] = None) -> str:
        value = self._mapped(column, text).strip().casefold().replace("–", "-")
        if not value and blank is not None:
            return blank
        if value not in allowed:
            raise ParseError(row, column, f"{text!r} not in {list(allowed)}")
        return value

    def number(self, row: int, column: str, text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise ParseError(row, column, f"{text!r} is not a number") from None
        if value != value or value in (float("inf"), float("-inf")):
            raise ParseError(row, column, "value is not finite")
        return value

    def flag(self, row: int, column: str, text: str) -> bool:
        value = self._mapped(column, text).strip().casefold()
        if value in _TRUE:
            return True
        if value in _FALSE:
            return False
        raise ParseError(row, column, f"{text!r} is not a 0/1 flag")

    def likert(self, row: int, column: str, text: str) -> int:
        try:
            return parse_likert(self._mapped(column, text))
        except UnknownLabel:
            raise ParseError(row, column, f"unknown Likert label {text!r}") from None

    def languages(self, row: int, column: str, text: str) -> frozenset:
        parts = [p for p in text.split("|") if p.strip()]
        return frozenset(self.enum(row, column, p, LANGUAGES) for p in parts)

    @staticmethod
    def optional_path(text: str) -> Optional[str]:
        return text or None

    @staticmethod
    def identifier(row: int, column: str, text: str) -> str:
        if not text:
            raise ParseError(row, column, "empty identifier")
        return text


def _parse_rows(frame: pd.DataFrame, build: Callable[[int, Dict[str, str]], Any]) -> List[Any]:
    # Row numbers refer to source lines: the header is line 1.
    return [build(i + 2, row) for i, row in enumerate(frame.to_dict("records"))]


def ingest(paths: PathsLike, column_map: Optional[Mapping[str, Any]] = None) -> SurveyDataset:
    """
    Reads segments, participants and responses into a validated SurveyDataset.

    Args:
        paths: a directory holding the canonical files, or a mapping with
               ``segments``/``participants``/``responses`` file paths (CSV,
               TSV or JSON).
        column_map: canonical field -> source column per file, plus an optional
                    ``values`` table rewriting source vocabulary.

    Returns:
        SurveyDataset: raw (unfiltered) data; recognition and difficulty flags kept.
    """
    column_map = column_map or {}
    files = _resolve_paths(paths)
    parser = _RowParser(column_map.get("values", {}))

    segment_frame = _canonical_frame(
        _read_table(files["segments"]), SEGMENT_FIELDS, column_map.get("segments", {}), "segments"
    )
    participant_frame = _canonical_frame(
        _read_table(files["participants"]),
        PARTICIPANT_FIELDS,
        column_map.get("participants", {}),
        "participants",
    )
    response_frame = _canonical_frame(
        _read_table(files["responses"]), RESPONSE_FIELDS, column_map.get("responses", {}), "responses"
    )

    segments = _parse_rows(
        segment_frame,
        lambda n, row: SegmentMeta(
            segment_id=parser.identifier(n, "segment_id", row["segment_id"]),
            song_id=parser.identifier(n, "song_id", row["song_id"]),
            singer_sex=parser.enum(n, "singer_sex", row["singer_sex"], SINGER_SEXES),
            singer_age_group=parser.enum(
                n, "singer_age_group", row["singer_age_group"], SINGER_AGE_GROUPS
            ),
            language=parser.enum(n, "language", row["language"], LANGUAGES),
            start_time=parser.number(n, "start_time", row["start_time"]),
            duration=parser.number(n, "duration", row["duration"]),
            audio_ref=parser.optional_path(row["audio_ref"]),
            stem_ref=parser.optional_path(row["stem_ref"]),
        ),
    )
    participants = _parse_rows(
        participant_frame,
        lambda n, row: ParticipantMeta(
            participant_id=parser.identifier(n, "participant_id", row["participant_id"]),
            gender=parser.enum(n, "gender", row["gender"], PARTICIPANT_GENDERS, blank=UNSPECIFIED_GENDER),
            age_group=parser.enum(n, "age_group", row["age_group"], PARTICIPANT_AGE_GROUPS),
            languages=parser.languages(n, "languages", row["languages"]),
            reported_difficulty=parser.flag(
                n, "reported_difficulty", row["reported_difficulty"]
            ),
        ),
    )
    responses = _parse_rows(
        response_frame,
        lambda n, row: Response(
            participant_id=parser.identifier(n, "participant_id", row["participant_id"]),
            segment_id=parser.identifier(n, "segment_id", row["segment_id"]),
            likert=parser.likert(n, "likert", row["likert"]),
            recognized_singer=parser.flag(n, "recognized_singer", row["recognized_singer"]),
        ),
    )

    dataset = SurveyDataset(
        segments=tuple(segments),
        participants=tuple(participants),
        responses=tuple(responses),
    )
    logger.info(
        "Ingested %d segments, %d participants, %d responses",
        len(dataset.segments),
        len(dataset.participants),
        len(dataset.responses),
    )
    return dataset


def _bit(flag: bool) -> str:
    return "1" if flag else "0"


def dataset_frames(dataset: SurveyDataset) -> Dict[str, pd.DataFrame]:
    """Canonical string frames for the three files, in the dataset's sorted order."""
    segments = pd.DataFrame(
        [
            {
                "segment_id": s.segment_id,
                "song_id": s.song_id,
                "singer_sex": s.singer_sex,
                "singer_age_group": s.singer_age_group,
                "language": s.language,
                "start_time": repr(float(s.start_time)),
                "duration": repr(float(s.duration)),
                "audio_ref": s.audio_ref or "",
                "stem_ref": s.stem_ref or "",
            }
            for s in dataset.segments
        ],
        columns=SEGMENT_FIELDS,
    )
    participants = pd.DataFrame(
        [
            {
                "participant_id": p.participant_id,
                "gender": p.gender,
                "age_group": p.age_group,
                "languages": "|".join(sorted(p.languages)),
                "reported_difficulty": _bit(p.reported_difficulty),
            }
            for p in dataset.participants
        ],
        columns=PARTICIPANT_FIELDS,
    )
    responses = pd.DataFrame(
        [
            {
                "participant_id": r.participant_id,
                "segment_id": r.segment_id,
                "likert": str(r.likert),
                "recognized_singer": _bit(r.recognized_singer),
            }
            for r in dataset.responses
        ],
        columns=RESPONSE_FIELDS,
    )
    return {"segments": segments, "participants": participants, "responses": responses}


def export_dataset(dataset: SurveyDataset, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Writes the canonical CSV files; ``ingest(out_dir)`` reads back an equal dataset."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for kind, frame in dataset_frames(dataset).items():
        target = out / CANONICAL_FILES[kind]
        frame.to_csv(target, index=False, encoding="utf-8", lineterminator="\n")
        written[kind] = target
    return written


def dataset_fingerprint(dataset: SurveyDataset) -> str:
    """SHA-256 over the canonical CSV rendering of the dataset."""
    digest = hashlib.sha256()
    for kind, frame in dataset_frames(dataset).items():
        digest.update(kind.encode("utf-8"))
        digest.update(frame.to_csv(index=False, lineterminator="\n").encode("utf-8"))
    return digest.hexdigest()
