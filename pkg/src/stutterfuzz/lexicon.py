"""Pronunciation dictionary parsing and syllabification.

Dictionary files follow the common ARPAbet convention: one entry per
line, word and phones separated by whitespace, ";;;" comment lines,
alternate pronunciations marked "WORD(2)". Vowel phones carry a stress
digit; consonants do not, which is how nuclei are found.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    EmptyDictionaryError,
    IoFailureError,
    NoVowelError,
    OutOfVocabularyError,
)
from .textnorm import normalize_text

_PHONE = re.compile(r"^[A-Z]{1,4}[0-2]?$")
_VARIANT = re.compile(r"^(.*)\((\d+)\)$")

# English onset clusters considered legal when splitting consonants
# between two nuclei; the longest legal suffix of the cluster starts the
# following syllable and the rest stays in the coda.
_LEGAL_ONSETS: frozenset[tuple[str, ...]] = frozenset(
    [(p,) for p in (
        "P", "T", "K", "B", "D", "G", "F", "V", "TH", "DH", "S", "Z",
        "SH", "ZH", "CH", "JH", "M", "N", "R", "L", "HH", "W", "Y",
    )]
    + [
        ("P", "R"), ("T", "R"), ("K", "R"), ("B", "R"), ("D", "R"),
        ("G", "R"), ("F", "R"), ("TH", "R"), ("SH", "R"),
        ("P", "L"), ("K", "L"), ("B", "L"), ("G", "L"), ("F", "L"), ("S", "L"),
        ("T", "W"), ("K", "W"), ("D", "W"), ("S", "W"), ("TH", "W"), ("G", "W"),
        ("S", "P"), ("S", "T"), ("S", "K"), ("S", "F"), ("S", "M"), ("S", "N"),
        ("P", "Y"), ("K", "Y"), ("B", "Y"), ("F", "Y"), ("V", "Y"),
        ("M", "Y"), ("N", "Y"), ("HH", "Y"), ("G", "Y"), ("D", "Y"), ("T", "Y"),
        ("S", "P", "R"), ("S", "P", "L"), ("S", "T", "R"),
        ("S", "K", "R"), ("S", "K", "W"), ("S", "K", "L"),
        ("S", "P", "Y"), ("S", "K", "Y"), ("S", "T", "Y"),
    ]
)


@dataclass(frozen=True)
class SyllableSpan:
    """A contiguous run of phones forming one syllable."""

    index: int
    phones: tuple[str, ...]


@dataclass
class PronunciationDict:
    """Word to pronunciation-variants mapping, preferred variant first."""

    entries: dict[str, tuple[tuple[str, ...], ...]]
    source_name: str = ""
    malformed: tuple[tuple[int, str], ...] = field(default_factory=tuple)

    def __contains__(self, word: str) -> bool:
        return _key(word) in self.entries

    def lookup(self, word: str) -> tuple[str, ...]:
        """Preferred pronunciation of `word`."""
        return self.pronunciations(word)[0]

    def pronunciations(self, word: str) -> tuple[tuple[str, ...], ...]:
        key = _key(word)
        try:
            return self.entries[key]
        except KeyError:
            raise OutOfVocabularyError(f"no pronunciation for {word!r}") from None


def _key(word: str) -> str:
    return normalize_text(word)


def is_vowel(phone: str) -> bool:
    return phone[-1].isdigit()


def strip_stress(phone: str) -> str:
    return phone[:-1] if is_vowel(phone) else phone


def parse_dictionary(text: str, source_name: str = "") -> PronunciationDict:
    """Parse dictionary `text`; malformed lines are collected, not fatal."""
    entries: dict[str, list[tuple[str, ...]]] = {}
    malformed: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(";;;"):
            continue
        fields = stripped.split()
        if len(fields) < 2:
            malformed.append((lineno, line))
            continue
        head, phones = fields[0], fields[1:]
        if any(not _PHONE.match(p) for p in phones):
            malformed.append((lineno, line))
            continue
        match = _VARIANT.match(head)
        word = match.group(1) if match else head
        key = _key(word)
        if not key:
            malformed.append((lineno, line))
            continue
        entries.setdefault(key, []).append(tuple(phones))
    if not entries:
        raise EmptyDictionaryError(f"{source_name or 'dictionary'}: no valid entries")
    return PronunciationDict(
        entries={w: tuple(ps) for w, ps in entries.items()},
        source_name=source_name,
        malformed=tuple(malformed),
    )


def load_dictionary(path: str | Path) -> PronunciationDict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read {path}: {exc}") from exc
    return parse_dictionary(text, source_name=str(path))


def serialize_dictionary(d: PronunciationDict) -> str:
    """Canonical line format; parse(serialize(d)) reproduces the entries."""
    lines = []
    for word in sorted(d.entries):
        for i, phones in enumerate(d.entries[word]):
            head = word.upper() if i == 0 else f"{word.upper()}({i + 1})"
            lines.append(f"{head}  {' '.join(phones)}")
    return "\n".join(lines) + "\n"


def syllabify(phones: tuple[str, ...] | list[str]) -> tuple[SyllableSpan, ...]:
    """Split a pronunciation into syllables around its vowel nuclei.

    Consonants between nuclei attach forward as the longest legal onset;
    leading and trailing consonants always join the first and last
    syllable respectively.
    """
    phones = tuple(phones)
    nuclei = [i for i, p in enumerate(phones) if is_vowel(p)]
    if not nuclei:
        raise NoVowelError(f"no vowel in {' '.join(phones) or '(empty)'}")
    starts = [0]
    for prev, cur in zip(nuclei, nuclei[1:]):
        cluster = tuple(strip_stress(p) for p in phones[prev + 1 : cur])
        take = 0
        while take < len(cluster) and cluster[take:] not in _LEGAL_ONSETS:
            take += 1
        starts.append(prev + 1 + take)
    starts.append(len(phones))
    return tuple(
        SyllableSpan(index=i, phones=phones[starts[i] : starts[i + 1]])
        for i in range(len(starts) - 1)
    )
