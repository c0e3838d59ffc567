"""Transcript normalization.

Every component that compares or tokenizes text goes through these two
functions, so recognizer output, ground truth, and derived expected text
always meet on the same surface form.
"""

from __future__ import annotations

import re

# Apostrophes survive only between word characters ("don't" stays one token).
_NON_WORD = re.compile(r"[^a-z0-9' ]+")
_LONE_APOSTROPHE = re.compile(r"(?<![a-z0-9])'|'(?![a-z0-9])")


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    lowered = text.lower().replace("’", "'")
    cleaned = _NON_WORD.sub(" ", lowered)
    cleaned = _LONE_APOSTROPHE.sub("", cleaned)
    return " ".join(cleaned.split())


def tokenize(text: str) -> list[str]:
    """Normalized word tokens of `text`, possibly empty."""
    return normalize_text(text).split()
