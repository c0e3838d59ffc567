"""Dysfluency mutators and the chains that drive rendering.

A chain is the full recipe for one test case: the benign recording's
reference plus an ordered list of mutation records whose anchors refer
to the original, unmutated timeline. Rendering applies records from the
latest anchor backwards so earlier anchors stay valid, which also makes
the output independent of record order within a chain.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from random import Random
from typing import Callable

from .alignment import AlignedTranscript, find_filler_candidates, from_alignment_json, to_alignment_json
from .audio import (
    DUPLICATE_CROSSFADE_MS,
    INSERT_FADE_MS,
    Waveform,
    duplicate_segment,
    extract_segment,
    insert_segment,
    insert_silence,
    time_stretch_segment,
)
from .errors import InvalidChainError, NotApplicableError

CHAIN_SCHEMA_VERSION = 1
MAX_CHAIN_LEN = 8

PAUSE_MS_RANGE = (50, 200)
STRETCH_FACTORS = (2, 3, 4)
COPY_COUNTS = (2, 3, 4)
MAX_INSERTIONS = 3


class MutatorKind(str, Enum):
    BLOCK = "block"
    PROLONGATION = "prolongation"
    SOUND_REPETITION = "sound_repetition"
    WORD_REPETITION = "word_repetition"
    INTERJECTION = "interjection"


ALL_KINDS = tuple(MutatorKind)

# Applied first at equal anchor positions: narrower scope wins.
_PRIORITY = {
    MutatorKind.PROLONGATION: 0,
    MutatorKind.SOUND_REPETITION: 1,
    MutatorKind.WORD_REPETITION: 2,
    MutatorKind.BLOCK: 3,
    MutatorKind.INTERJECTION: 4,
}


@dataclass(frozen=True)
class MutationRecord:
    """One sampled mutation, anchored to the original timeline."""

    kind: MutatorKind
    word_index: int
    syllable_index: int | None = None
    boundary_index: int | None = None
    slots: tuple[int, ...] = ()
    pause_ms: int | None = None
    factor: int | None = None
    copies: int | None = None
    filler: str | None = None

    def sort_key(self) -> tuple:
        return (
            self.kind.value,
            self.word_index,
            -1 if self.syllable_index is None else self.syllable_index,
            -1 if self.boundary_index is None else self.boundary_index,
            self.slots,
            self.pause_ms or 0,
            self.factor or 0,
            self.copies or 0,
            self.filler or "",
        )


@dataclass(frozen=True)
class MutationChain:
    benign_ref: str
    records: tuple[MutationRecord, ...] = ()

    def extended(self, record: MutationRecord) -> "MutationChain":
        return replace(self, records=self.records + (record,))

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class TestCase:
    test_case_id: str
    chain: MutationChain
    rendered: Waveform
    expected_text: str


# ---------------------------------------------------------------- planning

def plan_mutation(a: AlignedTranscript, kind: MutatorKind, rng: Random) -> MutationRecord:
    """Sample a valid record of `kind` against `a`, or raise NotApplicable."""
    words = a.words
    if kind is MutatorKind.BLOCK:
        eligible = [i for i, w in enumerate(words) if len(w.syllables) >= 2]
        if not eligible:
            raise NotApplicableError("no multi-syllable word to pause inside")
        wi = eligible[rng.randrange(len(eligible))]
        boundary = rng.randrange(len(words[wi].syllables) - 1)
        pause = rng.randint(*PAUSE_MS_RANGE)
        return MutationRecord(kind, wi, boundary_index=boundary, pause_ms=pause)
    if kind is MutatorKind.PROLONGATION:
        wi = rng.randrange(len(words))
        si = rng.randrange(len(words[wi].syllables))
        factor = STRETCH_FACTORS[rng.randrange(len(STRETCH_FACTORS))]
        return MutationRecord(kind, wi, syllable_index=si, factor=factor)
    if kind is MutatorKind.SOUND_REPETITION:
        wi = rng.randrange(len(words))
        si = rng.randrange(len(words[wi].syllables))
        copies = COPY_COUNTS[rng.randrange(len(COPY_COUNTS))]
        return MutationRecord(kind, wi, syllable_index=si, copies=copies)
    if kind is MutatorKind.WORD_REPETITION:
        wi = rng.randrange(len(words))
        copies = COPY_COUNTS[rng.randrange(len(COPY_COUNTS))]
        return MutationRecord(kind, wi, copies=copies)
    if kind is MutatorKind.INTERJECTION:
        candidates = find_filler_candidates(a)
        open_slots = list(range(1, len(words)))
        if not candidates or not open_slots:
            raise NotApplicableError("no filler syllable or no gap to put one in")
        chosen = candidates[rng.randrange(len(candidates))]
        count = min(rng.randint(1, MAX_INSERTIONS), len(open_slots))
        slots = tuple(sorted(rng.sample(open_slots, count)))
        return MutationRecord(
            kind,
            chosen.word_index,
            syllable_index=chosen.syllable_index,
            slots=slots,
            filler=chosen.spelling,
        )
    raise InvalidChainError(f"unknown mutator kind {kind!r}")


# ---------------------------------------------------------------- rendering

@dataclass(frozen=True)
class _Edit:
    position_ms: int
    priority: int
    tiebreak: tuple
    apply: Callable[[Waveform], Waveform]


def _effective_crossfade(start_ms: int, end_ms: int) -> int:
    # Largest fade below the permitted half-segment bound.
    return min(DUPLICATE_CROSSFADE_MS, (end_ms - start_ms - 1) // 2)


def _edits_for(
    benign: Waveform, a: AlignedTranscript, rec: MutationRecord
) -> list[_Edit]:
    word = a.words[rec.word_index]
    if rec.kind is MutatorKind.BLOCK:
        boundary = word.syllables[rec.boundary_index].end_ms
        pause = rec.pause_ms
        return [
            _Edit(
                boundary,
                _PRIORITY[rec.kind],
                rec.sort_key(),
                lambda w: insert_silence(w, boundary, pause),
            )
        ]
    if rec.kind is MutatorKind.PROLONGATION:
        syl = word.syllables[rec.syllable_index]
        factor = rec.factor
        return [
            _Edit(
                syl.start_ms,
                _PRIORITY[rec.kind],
                rec.sort_key(),
                lambda w: time_stretch_segment(w, syl.start_ms, syl.end_ms, factor),
            )
        ]
    if rec.kind is MutatorKind.SOUND_REPETITION:
        syl = word.syllables[rec.syllable_index]
        fade = _effective_crossfade(syl.start_ms, syl.end_ms)
        return [
            _Edit(
                syl.start_ms,
                _PRIORITY[rec.kind],
                rec.sort_key(),
                lambda w: duplicate_segment(
                    w, syl.start_ms, syl.end_ms, rec.copies, fade
                ),
            )
        ]
    if rec.kind is MutatorKind.WORD_REPETITION:
        fade = _effective_crossfade(word.start_ms, word.end_ms)
        return [
            _Edit(
                word.start_ms,
                _PRIORITY[rec.kind],
                rec.sort_key(),
                lambda w: duplicate_segment(
                    w, word.start_ms, word.end_ms, rec.copies, fade
                ),
            )
        ]
    if rec.kind is MutatorKind.INTERJECTION:
        syl = word.syllables[rec.syllable_index]
        snippet = extract_segment(benign, syl.start_ms, syl.end_ms)
        edits = []
        for slot in rec.slots:
            gap_start = a.words[slot - 1].end_ms
            gap_end = a.words[slot].start_ms
            position = (gap_start + gap_end) // 2
            edits.append(
                _Edit(
                    position,
                    _PRIORITY[rec.kind],
                    rec.sort_key() + (slot,),
                    lambda w, p=position: insert_segment(w, p, snippet, INSERT_FADE_MS),
                )
            )
        return edits
    raise InvalidChainError(f"unknown mutator kind {rec.kind!r}")


def validate_chain(a: AlignedTranscript, chain: MutationChain) -> None:
    """Raise InvalidChain unless every record is well formed against `a`."""
    if len(chain.records) > MAX_CHAIN_LEN:
        raise InvalidChainError(f"chain longer than {MAX_CHAIN_LEN} records")
    if a.audio_ref and chain.benign_ref and a.audio_ref != chain.benign_ref:
        raise InvalidChainError(
            f"chain built for {chain.benign_ref!r}, alignment is {a.audio_ref!r}"
        )
    n = len(a.words)
    for rec in chain.records:
        if not 0 <= rec.word_index < n:
            raise InvalidChainError(f"word index {rec.word_index} out of range")
        word = a.words[rec.word_index]
        if rec.kind is MutatorKind.BLOCK:
            if rec.boundary_index is None or not (
                0 <= rec.boundary_index < len(word.syllables) - 1
            ):
                raise InvalidChainError("block boundary outside the word")
            if rec.pause_ms is None or not (
                PAUSE_MS_RANGE[0] <= rec.pause_ms <= PAUSE_MS_RANGE[1]
            ):
                raise InvalidChainError(f"pause {rec.pause_ms} outside {PAUSE_MS_RANGE}")
        elif rec.kind is MutatorKind.PROLONGATION:
            _check_syllable(rec, word)
            if rec.factor not in STRETCH_FACTORS:
                raise InvalidChainError(f"stretch factor {rec.factor} not in {STRETCH_FACTORS}")
        elif rec.kind is MutatorKind.SOUND_REPETITION:
            _check_syllable(rec, word)
            if rec.copies not in COPY_COUNTS:
                raise InvalidChainError(f"copy count {rec.copies} not in {COPY_COUNTS}")
        elif rec.kind is MutatorKind.WORD_REPETITION:
            if rec.copies not in COPY_COUNTS:
                raise InvalidChainError(f"copy count {rec.copies} not in {COPY_COUNTS}")
        elif rec.kind is MutatorKind.INTERJECTION:
            _check_syllable(rec, word)
            if not rec.slots or not rec.filler:
                raise InvalidChainError("interjection needs slots and a filler spelling")
            if any(not 1 <= s <= n - 1 for s in rec.slots):
                raise InvalidChainError(f"insertion slots {rec.slots} out of range")
            if len(set(rec.slots)) != len(rec.slots):
                raise InvalidChainError("duplicate insertion slots")
        else:
            raise InvalidChainError(f"unknown mutator kind {rec.kind!r}")


def _check_syllable(rec: MutationRecord, word) -> None:
    if rec.syllable_index is None or not 0 <= rec.syllable_index < len(word.syllables):
        raise InvalidChainError(
            f"syllable index {rec.syllable_index} outside word {word.text!r}"
        )


def render(benign: Waveform, a: AlignedTranscript, chain: MutationChain) -> Waveform:
    """Apply every record of `chain` to `benign`.

    Edits are canonically ordered (descending anchor position, narrower
    scope first on ties) so any permutation of the same records renders
    the same samples.
    """
    validate_chain(a, chain)
    edits: list[_Edit] = []
    for rec in chain.records:
        edits.extend(_edits_for(benign, a, rec))
    edits.sort(key=lambda e: (-e.position_ms, e.priority, e.tiebreak))
    out = benign
    for edit in edits:
        out = edit.apply(out)
    return out


def expected_text(a: AlignedTranscript, chain: MutationChain) -> str:
    """Transcript a perfectly robust recognizer should produce.

    Word repetitions multiply their token; interjections splice filler
    spellings into their slots; the other mutators leave the surface
    form unchanged.
    """
    validate_chain(a, chain)
    repeats = [1] * len(a.words)
    fillers: dict[int, list[str]] = defaultdict(list)
    for rec in sorted(chain.records, key=MutationRecord.sort_key):
        if rec.kind is MutatorKind.WORD_REPETITION:
            repeats[rec.word_index] += rec.copies - 1
        elif rec.kind is MutatorKind.INTERJECTION:
            for slot in rec.slots:
                fillers[slot].append(rec.filler)
    out: list[str] = []
    for i, token in enumerate(a.tokens):
        out.extend(fillers.get(i, ()))
        out.extend([token] * repeats[i])
    return " ".join(out)


# ---------------------------------------------------------------- identity

def test_case_id(chain: MutationChain) -> str:
    """Stable 16-hex-digit id; permutations of one chain share it."""
    doc = {
        "benign_ref": chain.benign_ref,
        "records": [
            _record_to_dict(r) for r in sorted(chain.records, key=MutationRecord.sort_key)
        ],
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def build_test_case(
    benign: Waveform, a: AlignedTranscript, chain: MutationChain
) -> TestCase:
    return TestCase(
        test_case_id=test_case_id(chain),
        chain=chain,
        rendered=render(benign, a, chain),
        expected_text=expected_text(a, chain),
    )


# ---------------------------------------------------------------- interchange

def _record_to_dict(rec: MutationRecord) -> dict:
    anchor: dict = {"word": rec.word_index}
    params: dict = {}
    if rec.kind is MutatorKind.BLOCK:
        anchor["boundary"] = rec.boundary_index
        params["pause_ms"] = rec.pause_ms
    elif rec.kind is MutatorKind.PROLONGATION:
        anchor["syllable"] = rec.syllable_index
        params["factor"] = rec.factor
    elif rec.kind is MutatorKind.SOUND_REPETITION:
        anchor["syllable"] = rec.syllable_index
        params["copies"] = rec.copies
    elif rec.kind is MutatorKind.WORD_REPETITION:
        params["copies"] = rec.copies
    elif rec.kind is MutatorKind.INTERJECTION:
        anchor["syllable"] = rec.syllable_index
        anchor["slots"] = list(rec.slots)
        params["filler"] = rec.filler
    return {"kind": rec.kind.value, "anchor": anchor, "params": params}


def _record_from_dict(doc: dict) -> MutationRecord:
    try:
        kind = MutatorKind(doc["kind"])
        anchor = doc["anchor"]
        params = doc.get("params", {})
        return MutationRecord(
            kind=kind,
            word_index=int(anchor["word"]),
            syllable_index=(
                int(anchor["syllable"]) if "syllable" in anchor else None
            ),
            boundary_index=(
                int(anchor["boundary"]) if "boundary" in anchor else None
            ),
            slots=tuple(int(s) for s in anchor.get("slots", ())),
            pause_ms=params.get("pause_ms"),
            factor=params.get("factor"),
            copies=params.get("copies"),
            filler=params.get("filler"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidChainError(f"malformed mutation record: {exc}") from exc


def chain_to_json(chain: MutationChain, a: AlignedTranscript | None = None) -> dict:
    """Chain as plain JSON; with `a` given, embeds enough to replay alone."""
    doc = {
        "schema_version": CHAIN_SCHEMA_VERSION,
        "benign_ref": chain.benign_ref,
        "records": [_record_to_dict(r) for r in chain.records],
    }
    if a is not None:
        doc["transcript"] = a.transcript_text
        doc["alignment"] = to_alignment_json(a)
    return doc


def chain_from_json(doc: dict) -> tuple[MutationChain, AlignedTranscript | None]:
    try:
        version = int(doc.get("schema_version", 0))
        if version != CHAIN_SCHEMA_VERSION:
            raise InvalidChainError(f"unsupported chain schema version {version}")
        chain = MutationChain(
            benign_ref=str(doc["benign_ref"]),
            records=tuple(_record_from_dict(r) for r in doc["records"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidChainError(f"malformed chain document: {exc}") from exc
    aligned = None
    if "alignment" in doc:
        aligned = from_alignment_json(
            doc["alignment"],
            audio_ref=chain.benign_ref,
            transcript_text=doc.get("transcript"),
        )
    return chain, aligned
