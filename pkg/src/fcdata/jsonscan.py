"""Extraction of JSON values embedded in free-form LLM output or prose."""

from __future__ import annotations

import json
from typing import Iterator

_decoder = json.JSONDecoder()


def iter_json_values(text: str, open_chars: str = "{[") -> Iterator[tuple[object, int, int]]:
    """Yield (value, start, end) for each top-level JSON value found in text.

    Scans left to right; candidate starts are the given opening characters.
    Decoding is done by the stdlib decoder, so braces inside strings do not
    confuse the scan. Overlapping candidates are skipped.
    """
    pos = 0
    while pos < len(text):
        starts = [i for c in open_chars if (i := text.find(c, pos)) != -1]
        if not starts:
            return
        start = min(starts)
        try:
            value, end = _decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            pos = start + 1
            continue
        yield value, start, end
        pos = end


def first_json_object(text: str) -> dict | None:
    """The first JSON object in the text (fenced or bare), or None."""
    for value, _, _ in iter_json_values(text, open_chars="{"):
        if isinstance(value, dict):
            return value
    return None
