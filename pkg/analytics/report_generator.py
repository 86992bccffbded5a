# analytics/report_generator.py
from decimal import ROUND_HALF_UP, Decimal
import io
import json
from typing import Any, Dict, List, Optional

import pandas as pd

from exceptions import AnalyticsError, UnsupportedFormat
from .correspondence_analyzer import ACResult, AnalyticsReport, CrossTab, UnsureResult
from .subgroups import SubgroupKey

FORMATS = ("markdown", "json", "csv")
SCHEMA_VERSION = 1

_ROW_NOUN = {"sex": "singers", "age_group": "singers", "language": "tracks"}
_DIM_TITLE = {"gender": "Gender", "sex": "Gender", "age_group": "Age", "language": "Language"}

CSV_COLUMNS = [
    "table",
    "participant_dim",
    "participant_value",
    "singer_dim",
    "singer_value",
    "n_participants",
    "n_segments",
    "count",
    "percent",
]


def round_half_up(value: Optional[float]) -> str:
    """One-decimal presentation rounding; absent values render as an empty string."""
    if value is None:
        return ""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _dim_pair(pair) -> Optional[List[str]]:
    return list(pair) if pair is not None else None


def _key_dict(key: SubgroupKey) -> Dict[str, Any]:
    return {
        "participant_dim": _dim_pair(key.participant_dim),
        "singer_dim": _dim_pair(key.singer_dim),
    }


def _ac_dict(result: ACResult) -> Dict[str, Any]:
    return {
        "key": _key_dict(result.key),
        "n_segments": result.n_segments,
        "aligned": result.aligned,
        "ac_percent": result.ac_percent,
        "ac_percent_display": round_half_up(result.ac_percent),
    }


def _unsure_dict(result: UnsureResult) -> Dict[str, Any]:
    return {
        "key": _key_dict(result.key),
        "n_segments": result.n_segments,
        "unsure": result.unsure,
        "unsure_percent": result.unsure_percent,
        "unsure_percent_display": round_half_up(result.unsure_percent),
    }


def report_to_dict(report: AnalyticsReport) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "provenance": report.provenance,
        "ac_tables": [
            {
                "participant_dim": table.participant_dim,
                "singer_dim": table.singer_dim,
                "participant_values": list(table.participant_values),
                "singer_values": list(table.singer_values),
                "n_participants": list(table.n_participants),
                "dropped_rows": list(table.dropped_rows),
                "cells": [[_ac_dict(cell) for cell in row] for row in table.cells],
                "population": [_ac_dict(cell) for cell in table.population],
            }
            for table in report.ac_tables
        ],
        "unsure_table": [_unsure_dict(result) for result in report.unsure_table],
    }


def _key_from(data: Dict[str, Any]) -> SubgroupKey:
    p = data.get("participant_dim")
    s = data.get("singer_dim")
    return SubgroupKey(
        participant_dim=tuple(p) if p is not None else None,
        singer_dim=tuple(s) if s is not None else None,
    )


def _ac_from(data: Dict[str, Any]) -> ACResult:
    return ACResult(
        key=_key_from(data["key"]),
        n_segments=data["n_segments"],
        aligned=data["aligned"],
        ac_percent=data["ac_percent"],
    )


def report_from_json(payload: bytes) -> AnalyticsReport:
    """Parses the JSON rendering back into an AnalyticsReport."""
    try:
        data = json.loads(payload)
        return AnalyticsReport(
            ac_tables=tuple(
                CrossTab(
                    participant_dim=t["participant_dim"],
                    singer_dim=t["singer_dim"],
                    participant_values=tuple(t["participant_values"]),
                    singer_values=tuple(t["singer_values"]),
                    n_participants=tuple(t["n_participants"]),
                    cells=tuple(tuple(_ac_from(c) for c in row) for row in t["cells"]),
                    population=tuple(_ac_from(c) for c in t["population"]),
                    dropped_rows=tuple(t["dropped_rows"]),
                )
                for t in data["ac_tables"]
            ),
            unsure_table=tuple(
                UnsureResult(
                    key=_key_from(u["key"]),
                    n_segments=u["n_segments"],
                    unsure=u["unsure"],
                    unsure_percent=u["unsure_percent"],
                )
                for u in data["unsure_table"]
            ),
            provenance=data.get("provenance", {}),
        )
    except (ValueError, KeyError, TypeError) as e:
        raise AnalyticsError(f"Not a valid analytics report: {e}") from e


def _markdown_row(cells) -> str:
    return "| " + " | ".join(str(c) for c in cells) + " |"


def _markdown_table(header, rows) -> List[str]:
    lines = [_markdown_row(header), _markdown_row(["---"] * len(header))]
    lines.extend(_markdown_row(r) for r in rows)
    return lines


def _render_markdown(report: AnalyticsReport) -> str:
    lines = ["# AC (%) of different subgroups", ""]
    for table in report.ac_tables:
        noun = _ROW_NOUN[table.singer_dim]
        lines.append(
            f"## Participant {table.participant_dim} x singer {table.singer_dim}"
        )
        lines.append("")
        rows = [["nb. participants", *table.n_participants]]
        for j, s_value in enumerate(table.singer_values):
            rows.append(
                [f"AC {s_value} {noun}"]
                + [round_half_up(row[j].ac_percent) for row in table.cells]
            )
        lines.extend(_markdown_table(["", *table.participant_values], rows))
        if table.dropped_rows:
            lines.append("")
            lines.append(
                "Not reported (participants do not cover every singer subgroup): "
                + ", ".join(table.dropped_rows)
            )
        lines.append("")

    lines.append("# Unsure (%) of different subgroups of singers")
    lines.append("")
    groups = []
    for result in report.unsure_table:
        dim = result.key.singer_dim[0]
        if not groups or groups[-1][0] != dim:
            groups.append((dim, []))
        groups[-1][1].append(result)
    if groups:
        lines.append(
            "Groups: "
            + "; ".join(
                f"{_DIM_TITLE[dim]} ({', '.join(r.key.singer_dim[1] for r in results)})"
                for dim, results in groups
            )
        )
        lines.append("")
    header = [""] + [r.key.singer_dim[1] for r in report.unsure_table]
    rows = [["Unsure (%)"] + [round_half_up(r.unsure_percent) for r in report.unsure_table]]
    lines.extend(_markdown_table(header, rows if report.unsure_table else []))
    lines.append("")
    return "\n".join(lines)


def _csv_rows(report: AnalyticsReport) -> List[Dict[str, Any]]:
    rows = []
    for table in report.ac_tables:
        name = f"ac_{table.participant_dim}_x_{table.singer_dim}"
        for i, p_value in enumerate(table.participant_values):
            for cell in table.cells[i]:
                rows.append(
                    {
                        "table": name,
                        "participant_dim": table.participant_dim,
                        "participant_value": p_value,
                        "singer_dim": table.singer_dim,
                        "singer_value": cell.key.singer_dim[1],
                        "n_participants": table.n_participants[i],
                        "n_segments": cell.n_segments,
                        "count": cell.aligned,
                        "percent": round_half_up(cell.ac_percent),
                    }
                )
        for cell in table.population:
            rows.append(
                {
                    "table": name,
                    "participant_dim": "",
                    "participant_value": "all",
                    "singer_dim": table.singer_dim,
                    "singer_value": cell.key.singer_dim[1],
                    "n_participants": "",
                    "n_segments": cell.n_segments,
                    "count": cell.aligned,
                    "percent": round_half_up(cell.ac_percent),
                }
            )
    for result in report.unsure_table:
        rows.append(
            {
                "table": "unsure",
                "participant_dim": "",
                "participant_value": "all",
                "singer_dim": result.key.singer_dim[0],
                "singer_value": result.key.singer_dim[1],
                "n_participants": "",
                "n_segments": result.n_segments,
                "count": result.unsure,
                "percent": round_half_up(result.unsure_percent),
            }
        )
    return rows


def render_report(report: AnalyticsReport, fmt: str) -> bytes:
    """
    Renders a report as Markdown, JSON or CSV.

    Markdown and CSV carry percentages rounded half-up to one decimal. JSON keeps
    full precision next to the rounded display string, so that
    ``report_from_json(render_report(r, "json")) == r``.
    """
    fmt = fmt.lower()
    if fmt in ("md", "markdown"):
        return _render_markdown(report).encode("utf-8")
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n").encode(
            "utf-8"
        )
    if fmt == "csv":
        buffer = io.StringIO()
        pd.DataFrame(_csv_rows(report), columns=CSV_COLUMNS).to_csv(
            buffer, index=False, lineterminator="\n"
        )
        return buffer.getvalue().encode("utf-8")
    raise UnsupportedFormat(f"Unsupported report format {fmt!r}; expected one of {FORMATS}")
