"""Word and syllable timing from energy-based segmentation.

Words are located as runs of voiced frames; the run count is forced to
the transcript's word count by merging across the smallest gaps or
splitting the longest runs at interior energy minima. Syllable timing
inside a word is proportional to per-syllable phone counts. This stays
deliberately simple: mutator anchors only need to land inside the right
word, not on phone-exact boundaries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .audio import Waveform, rms_energy
from .errors import (
    EmptyTranscriptError,
    InvalidAlignmentError,
    InvalidParamsError,
    NoSpeechError,
    NoVowelError,
    OutOfVocabularyError,
    UnsplittableAudioError,
)
from .lexicon import PronunciationDict, strip_stress, syllabify
from .textnorm import normalize_text, tokenize

log = logging.getLogger(__name__)

# One-syllable filler words recognizable inside ordinary speech, keyed by
# the spelling used when one is spliced into an expected transcript.
DEFAULT_FILLERS: dict[str, tuple[str, ...]] = {
    "uh": ("AH",),
    "um": ("AH", "M"),
    "er": ("ER",),
    "ah": ("AA",),
    "eh": ("EH",),
}


@dataclass(frozen=True)
class SegmentationParams:
    frame_ms: int = 25
    hop_ms: int = 10
    silence_threshold: float = 0.02
    min_gap_ms: int = 120


@dataclass(frozen=True)
class TimedSyllable:
    phones: tuple[str, ...]
    start_ms: int
    end_ms: int
    is_filler_candidate: bool = False


@dataclass(frozen=True)
class TimedWord:
    text: str
    start_ms: int
    end_ms: int
    syllables: tuple[TimedSyllable, ...]


@dataclass(frozen=True)
class FillerCandidate:
    word_index: int
    syllable_index: int
    spelling: str
    syllable: TimedSyllable


@dataclass(frozen=True)
class AlignedTranscript:
    audio_ref: str
    transcript_text: str
    words: tuple[TimedWord, ...]

    def __post_init__(self) -> None:
        _check_invariants(self.words)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(w.text for w in self.words)


def _check_invariants(words: tuple[TimedWord, ...]) -> None:
    if not words:
        raise InvalidAlignmentError("alignment has no words")
    prev_end = None
    for w in words:
        if not w.syllables:
            raise InvalidAlignmentError(f"word {w.text!r} has no syllables")
        if w.start_ms >= w.end_ms:
            raise InvalidAlignmentError(f"word {w.text!r} spans no time")
        if prev_end is not None and w.start_ms < prev_end:
            raise InvalidAlignmentError(f"word {w.text!r} overlaps its predecessor")
        if w.syllables[0].start_ms != w.start_ms or w.syllables[-1].end_ms != w.end_ms:
            raise InvalidAlignmentError(f"syllables of {w.text!r} do not cover the word")
        for a, b in zip(w.syllables, w.syllables[1:]):
            if a.end_ms != b.start_ms:
                raise InvalidAlignmentError(f"syllable gap inside {w.text!r}")
        for s in w.syllables:
            if s.start_ms >= s.end_ms:
                raise InvalidAlignmentError(f"empty syllable inside {w.text!r}")
        prev_end = w.end_ms


# ---------------------------------------------------------------- segmentation

def voiced_frame_runs(
    w: Waveform, params: SegmentationParams | None = None
) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Merged runs of voiced frames as (first, last) frame indices."""
    params = params or SegmentationParams()
    track = rms_energy(w, params.frame_ms, params.hop_ms)
    energies = track.values
    voiced = energies > params.silence_threshold
    if not bool(voiced.any()):
        raise NoSpeechError("no speech detected: no frame above the silence threshold")
    runs: list[tuple[int, int]] = []
    start = None
    for i, v in enumerate(voiced):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(voiced) - 1))
    merged = [runs[0]]
    for f0, f1 in runs[1:]:
        gap_ms = (f0 - merged[-1][1] - 1) * params.hop_ms
        if gap_ms < params.min_gap_ms:
            merged[-1] = (merged[-1][0], f1)
        else:
            merged.append((f0, f1))
    return merged, energies


def detect_word_intervals(
    w: Waveform, expected_count: int, params: SegmentationParams | None = None
) -> list[tuple[int, int]]:
    """`expected_count` non-overlapping speech intervals in milliseconds."""
    if expected_count < 1:
        raise InvalidParamsError("expected_count must be positive")
    params = params or SegmentationParams()
    runs, energies = voiced_frame_runs(w, params)
    while len(runs) > expected_count:
        gaps = [runs[i + 1][0] - runs[i][1] for i in range(len(runs) - 1)]
        i = int(np.argmin(gaps))
        runs[i : i + 2] = [(runs[i][0], runs[i + 1][1])]
    while len(runs) < expected_count:
        lengths = [f1 - f0 + 1 for f0, f1 in runs]
        i = int(np.argmax(lengths))
        f0, f1 = runs[i]
        # Splitting needs two frames on each side of the cut.
        if f1 - f0 + 1 < 4:
            raise UnsplittableAudioError(
                f"cannot produce {expected_count} intervals: longest voiced run "
                f"has only {f1 - f0 + 1} frames"
            )
        m = f0 + 2 + int(np.argmin(energies[f0 + 2 : f1]))
        runs[i : i + 1] = [(f0, m - 1), (m, f1)]
    hop = params.hop_ms
    return [(f0 * hop, min((f1 + 1) * hop, w.duration_ms)) for f0, f1 in runs]


# ---------------------------------------------------------------- alignment

def match_filler(
    phones: tuple[str, ...], fillers: dict[str, tuple[str, ...]] | None = None
) -> str | None:
    """Spelling of the filler these phones pronounce, ignoring stress."""
    fillers = DEFAULT_FILLERS if fillers is None else fillers
    bare = tuple(strip_stress(p) for p in phones)
    for spelling, pron in fillers.items():
        if bare == tuple(pron):
            return spelling
    return None


def proportional_syllable_times(
    start_ms: int, end_ms: int, phone_counts: list[int]
) -> list[tuple[int, int]]:
    """Partition [start, end) proportionally to phone counts.

    Boundaries round down; the last syllable absorbs the remainder.
    """
    total = sum(phone_counts)
    span = end_ms - start_ms
    bounds = [start_ms]
    running = 0
    for count in phone_counts[:-1]:
        running += count
        bounds.append(start_ms + span * running // total)
    bounds.append(end_ms)
    return list(zip(bounds, bounds[1:]))


def align(
    w: Waveform,
    transcript: str,
    dictionary: PronunciationDict,
    params: SegmentationParams | None = None,
    audio_ref: str = "",
) -> AlignedTranscript:
    """Attach word and syllable timing to `transcript` over `w`."""
    tokens = tokenize(transcript)
    if not tokens:
        raise EmptyTranscriptError("transcript normalizes to no tokens")
    intervals = detect_word_intervals(w, len(tokens), params)
    words = []
    for token, (s, e) in zip(tokens, intervals):
        spans = None
        try:
            pron = dictionary.lookup(token)
            try:
                spans = syllabify(pron)
            except NoVowelError:
                log.warning("pronunciation of %r has no vowel; keeping one syllable", token)
                spans = None
                syllables = (_plain_syllable(tuple(pron), s, e),)
        except OutOfVocabularyError:
            log.warning("%r not in dictionary; treating as one opaque syllable", token)
            syllables = (TimedSyllable((), s, e),)
        if spans is not None:
            counts = [len(sp.phones) for sp in spans]
            if e - s < sum(counts):
                log.warning("interval of %r too short to subdivide", token)
                syllables = (_plain_syllable(tuple(pron), s, e),)
            else:
                times = proportional_syllable_times(s, e, counts)
                syllables = tuple(
                    _plain_syllable(sp.phones, ts, te)
                    for sp, (ts, te) in zip(spans, times)
                )
        words.append(TimedWord(token, s, e, syllables))
    return AlignedTranscript(
        audio_ref=audio_ref,
        transcript_text=normalize_text(transcript),
        words=tuple(words),
    )


def _plain_syllable(phones: tuple[str, ...], start: int, end: int) -> TimedSyllable:
    return TimedSyllable(
        phones=phones,
        start_ms=start,
        end_ms=end,
        is_filler_candidate=match_filler(phones) is not None,
    )


def find_filler_candidates(
    a: AlignedTranscript, fillers: dict[str, tuple[str, ...]] | None = None
) -> tuple[FillerCandidate, ...]:
    """Syllables of `a` that pronounce a known filler word."""
    out = []
    for wi, word in enumerate(a.words):
        for si, syl in enumerate(word.syllables):
            spelling = match_filler(syl.phones, fillers)
            if spelling is not None:
                out.append(FillerCandidate(wi, si, spelling, syl))
    return tuple(out)


# ---------------------------------------------------------------- interchange

def to_alignment_json(a: AlignedTranscript) -> dict:
    """Plain-JSON form; also accepted from external forced aligners."""
    return {
        "words": [
            {
                "text": w.text,
                "start_ms": w.start_ms,
                "end_ms": w.end_ms,
                "syllables": [
                    {
                        "phones": list(s.phones),
                        "start_ms": s.start_ms,
                        "end_ms": s.end_ms,
                    }
                    for s in w.syllables
                ],
            }
            for w in a.words
        ]
    }


def from_alignment_json(
    doc: dict, audio_ref: str = "", transcript_text: str | None = None
) -> AlignedTranscript:
    """Rebuild an alignment from its JSON form, revalidating invariants."""
    try:
        raw_words = doc["words"]
        words = tuple(
            TimedWord(
                text=normalize_text(str(rw["text"])),
                start_ms=int(rw["start_ms"]),
                end_ms=int(rw["end_ms"]),
                syllables=tuple(
                    _plain_syllable(
                        tuple(str(p) for p in rs["phones"]),
                        int(rs["start_ms"]),
                        int(rs["end_ms"]),
                    )
                    for rs in rw["syllables"]
                ),
            )
            for rw in raw_words
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidAlignmentError(f"malformed alignment document: {exc}") from exc
    if transcript_text is None:
        transcript_text = " ".join(w.text for w in words)
    return AlignedTranscript(
        audio_ref=audio_ref, transcript_text=normalize_text(transcript_text), words=words
    )
