import json

import pytest

from conftest import PARTICIPANTS_CSV, RESPONSES_CSV, SEGMENTS_CSV, write_canonical
from dataset import dataset_fingerprint, export_dataset, ingest
from exceptions import IntegrityError, InvalidInputError, ParseError


def test_ingest_reads_all_rows(raw_survey):
    assert len(raw_survey.segments) == 4
    assert len(raw_survey.participants) == 3
    assert len(raw_survey.responses) == 10
    p2 = raw_survey.participant_index["p2"]
    assert p2.languages == frozenset({"en", "fr"})
    assert raw_survey.segment_index["a2"].start_time == 3.0
    likert = {(r.participant_id, r.segment_id): r.likert for r in raw_survey.responses}
    assert likert[("p2", "a1")] == 1
    assert likert[("p2", "a2")] == -1


def test_export_then_ingest_gives_equal_dataset(raw_survey, tmp_path):
    export_dataset(raw_survey, tmp_path / "canonical")
    again = ingest(tmp_path / "canonical")
    assert again == raw_survey
    assert dataset_fingerprint(again) == dataset_fingerprint(raw_survey)


def test_row_order_does_not_matter(tmp_path, raw_survey):
    header, *rows = RESPONSES_CSV.strip().splitlines()
    shuffled = "\n".join([header, *reversed(rows)]) + "\n"
    reordered = ingest(write_canonical(tmp_path / "shuffled", responses=shuffled))
    assert reordered == raw_survey


def test_missing_file_names_the_path(tmp_path):
    write_canonical(tmp_path / "partial")
    (tmp_path / "partial" / "responses.csv").unlink()
    with pytest.raises(InvalidInputError, match="responses.csv") as info:
        ingest(tmp_path / "partial")
    assert info.value.exit_code == 2


def test_unknown_label_reports_row_and_column(tmp_path):
    bad = RESPONSES_CSV.replace("p1,a2,-1,0", "p1,a2,perhaps,0")
    with pytest.raises(ParseError) as info:
        ingest(write_canonical(tmp_path / "bad", responses=bad))
    assert info.value.row == 3
    assert info.value.column == "likert"


def test_unknown_enum_value_is_a_parse_error(tmp_path):
    bad = SEGMENTS_CSV.replace("b1,songB,male", "b1,songB,unknown")
    with pytest.raises(ParseError) as info:
        ingest(write_canonical(tmp_path / "bad", segments=bad))
    assert info.value.column == "singer_sex"


def test_blank_gender_counts_as_other(tmp_path):
    participants = PARTICIPANTS_CSV.replace("p3,female,50-65", "p3,,50-65")
    dataset = ingest(write_canonical(tmp_path / "blank", participants=participants))
    assert dataset.participant_index["p3"].gender == "other"


def test_blank_singer_sex_is_still_a_parse_error(tmp_path):
    bad = SEGMENTS_CSV.replace("b1,songB,male", "b1,songB,")
    with pytest.raises(ParseError) as info:
        ingest(write_canonical(tmp_path / "bad", segments=bad))
    assert info.value.column == "singer_sex"


def test_dangling_segment_reference(tmp_path):
    bad = RESPONSES_CSV + "p1,zz,1,0\n"
    with pytest.raises(IntegrityError) as info:
        ingest(write_canonical(tmp_path / "bad", responses=bad))
    assert info.value.key == "zz"


def test_duplicate_segment_id(tmp_path):
    bad = SEGMENTS_CSV + "a1,songC,male,65+,ge,0.0,3.0,,\n"
    with pytest.raises(IntegrityError):
        ingest(write_canonical(tmp_path / "bad", segments=bad))


def test_more_than_six_segments_per_song(tmp_path):
    extra = "".join(f"c{i},songC,male,65+,ge,{3.0 * i},3.0,,\n" for i in range(7))
    with pytest.raises(IntegrityError) as info:
        ingest(write_canonical(tmp_path / "bad", segments=SEGMENTS_CSV + extra))
    assert info.value.key == "songC"


def test_column_map_and_value_table(tmp_path, raw_survey):
    segments = (
        SEGMENTS_CSV.replace("segment_id,song_id,singer_sex", "excerpt,track,gender_of_singer")
        .replace(",female,", ",F,")
        .replace(",male,", ",M,")
    )
    source = write_canonical(tmp_path / "mapped", segments=segments)
    column_map = {
        "segments": {"segment_id": "excerpt", "song_id": "track", "singer_sex": "gender_of_singer"},
        "values": {"singer_sex": {"F": "female", "M": "male"}},
    }
    assert ingest(source, column_map) == raw_survey


def test_json_sources(tmp_path, raw_survey):
    import pandas as pd

    source = write_canonical(tmp_path / "csv")
    paths = {}
    for kind in ("segments", "participants", "responses"):
        frame = pd.read_csv(source / f"{kind}.csv", dtype=str, keep_default_na=False)
        target = tmp_path / f"{kind}.json"
        target.write_text(json.dumps(frame.to_dict("records")), encoding="utf-8")
        paths[kind] = target
    assert ingest(paths) == raw_survey


def test_fingerprint_changes_with_content(tmp_path, raw_survey):
    changed = ingest(
        write_canonical(tmp_path / "changed", participants=PARTICIPANTS_CSV.replace("p3,female", "p3,male"))
    )
    assert dataset_fingerprint(changed) != dataset_fingerprint(raw_survey)
