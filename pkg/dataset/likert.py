# dataset/likert.py

import re

from exceptions import UnknownLabel

LIKERT_LABELS = {
    "definitely feminine": 2,
    "rather feminine": 1,
    "i don't know": 0,
    "rather masculine": -1,
    "definitely masculine": -2,
}

_INTEGER = re.compile(r"^[+-]?\d+$")


def parse_likert(label) -> int:
    """
    Maps a survey answer onto the -2..2 scale (positive is feminine).

    Accepts the five canonical labels (trimmed, case-insensitive) and the
    integers -2..2 themselves. Anything else raises UnknownLabel.
    """
    if isinstance(label, bool):
        raise UnknownLabel(label)
    if isinstance(label, int):
        if label in LIKERT_LABELS.values():
            return label
        raise UnknownLabel(label)
    if not isinstance(label, str):
        raise UnknownLabel(label)

    text = label.strip()
    if _INTEGER.match(text):
        value = int(text)
        if -2 <= value <= 2:
            return value
        raise UnknownLabel(label)

    try:
        return LIKERT_LABELS[text.casefold()]
    except KeyError:
        raise UnknownLabel(label) from None
