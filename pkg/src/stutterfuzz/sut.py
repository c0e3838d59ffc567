"""Adapters for the recognizers under test.

Two mock recognizers ship in-tree: an oracle that always answers the
ground-truth transcript, and a fragile recognizer that re-derives text
from the audio's energy contour and so mirrors injected dysfluencies
back into its output. Real systems attach over HTTP or as subprocesses.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .alignment import AlignedTranscript, SegmentationParams, voiced_frame_runs
from .audio import Waveform, encode_wav, ms_to_samples, save_wav
from .errors import (
    ConfigError,
    InvalidParamsError,
    NoSpeechError,
    NoVowelError,
    OutOfVocabularyError,
)
from .lexicon import PronunciationDict, syllabify
from .textnorm import normalize_text, tokenize

log = logging.getLogger(__name__)

# Sample-exact prefix shorter than this is treated as coincidence.
MIN_PREFIX_SAMPLES = 8
TWIN_WINDOW_MS = 60

HTTP_MAX_INFLIGHT = 4
HTTP_ATTEMPTS = 3

# The fragile mock hears any pause at or above the shortest injected
# block, so its segmentation merges far less than the aligner's.
MOCK_MIN_GAP_MS = 20
ADVANCE_NUM, ADVANCE_DEN = 3, 4


@dataclass(frozen=True)
class SutDescriptor:
    name: str
    kind: str
    endpoint: str | None = None
    command: str | None = None
    options: dict = field(default_factory=dict)
    timeout_ms: int = 30_000
    retries: int = 2

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("recognizer needs a non-empty name")
        if self.timeout_ms <= 0:
            raise ConfigError(f"{self.name!r}: timeout_ms must be positive")
        if self.retries < 0:
            raise ConfigError(f"{self.name!r}: retries must be non-negative")


@dataclass(frozen=True)
class TranscriptionResult:
    sut_name: str
    text: str
    latency_ms: float = 0.0
    status: str = "ok"
    error_detail: str | None = None

    def __post_init__(self) -> None:
        if self.status not in ("ok", "error"):
            raise InvalidParamsError(f"unknown result status {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def error_result(sut_name: str, detail: str, latency_ms: float = 0.0) -> TranscriptionResult:
    return TranscriptionResult(
        sut_name, "", latency_ms=latency_ms, status="error", error_detail=detail
    )


class SutAdapter(Protocol):
    @property
    def name(self) -> str: ...

    def transcribe(self, w: Waveform) -> TranscriptionResult: ...


# ---------------------------------------------------------------- registry

@dataclass(frozen=True)
class _BenignEntry:
    ref: str
    waveform: Waveform
    transcript: str
    alignment: AlignedTranscript | None
    token_durations_ms: tuple[int, ...]


class GroundTruthRegistry:
    """Benign recordings the mocks treat as their training distribution.

    A mutated waveform is traced to its benign ancestor by the longest
    sample-exact shared prefix, so every registered recording must be
    distinguishable within its opening window.
    """

    def __init__(self) -> None:
        self._entries: dict[str, _BenignEntry] = {}

    def register(
        self,
        ref: str,
        waveform: Waveform,
        transcript: str,
        alignment: AlignedTranscript | None = None,
        dictionary: PronunciationDict | None = None,
    ) -> None:
        if ref in self._entries:
            raise InvalidParamsError(f"benign ref {ref!r} already registered")
        tokens = tokenize(transcript)
        if not tokens:
            raise InvalidParamsError(f"benign ref {ref!r} has an empty transcript")
        window = ms_to_samples(TWIN_WINDOW_MS, waveform.sample_rate_hz)
        for other in self._entries.values():
            if other.waveform.sample_rate_hz != waveform.sample_rate_hz:
                continue
            span = min(len(waveform), len(other.waveform), window)
            if span and np.array_equal(
                waveform.samples[:span], other.waveform.samples[:span]
            ):
                raise InvalidParamsError(
                    f"{ref!r} and {other.ref!r} are identical for their first "
                    f"{TWIN_WINDOW_MS} ms; ancestors would be ambiguous"
                )
        durations = _token_durations(waveform, tokens, alignment, dictionary)
        self._entries[ref] = _BenignEntry(
            ref=ref,
            waveform=waveform,
            transcript=normalize_text(transcript),
            alignment=alignment,
            token_durations_ms=durations,
        )

    def __contains__(self, ref: str) -> bool:
        return ref in self._entries

    def refs(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def _entry(self, ref: str) -> _BenignEntry:
        if ref not in self._entries:
            raise InvalidParamsError(f"unknown benign ref {ref!r}")
        return self._entries[ref]

    def transcript_for(self, ref: str) -> str:
        return self._entry(ref).transcript

    def waveform_for(self, ref: str) -> Waveform:
        return self._entry(ref).waveform

    def alignment_for(self, ref: str) -> AlignedTranscript | None:
        return self._entry(ref).alignment

    def token_durations_for(self, ref: str) -> tuple[int, ...]:
        return self._entry(ref).token_durations_ms

    def identify(self, w: Waveform) -> str | None:
        """Benign ancestor of `w`, or None when no clear ancestor exists."""
        best_ref: str | None = None
        best_len = MIN_PREFIX_SAMPLES - 1
        tied = False
        for entry in self._entries.values():
            if entry.waveform.sample_rate_hz != w.sample_rate_hz:
                continue
            cpl = _common_prefix_len(w.samples, entry.waveform.samples)
            if cpl > best_len:
                best_ref, best_len, tied = entry.ref, cpl, False
            elif cpl == best_len and best_ref is not None:
                tied = True
        if tied:
            return None
        return best_ref


def _common_prefix_len(a: np.ndarray, b: np.ndarray) -> int:
    span = min(len(a), len(b))
    if span == 0:
        return 0
    diff = a[:span] != b[:span]
    idx = int(np.argmax(diff))
    if not diff[idx]:
        return span
    return idx


def _token_durations(
    waveform: Waveform,
    tokens: Sequence[str],
    alignment: AlignedTranscript | None,
    dictionary: PronunciationDict | None,
) -> tuple[int, ...]:
    if alignment is not None:
        if len(alignment.words) != len(tokens):
            raise InvalidParamsError(
                f"alignment has {len(alignment.words)} words for {len(tokens)} tokens"
            )
        return tuple(w.end_ms - w.start_ms for w in alignment.words)
    # No alignment: split the voiced span by syllable weight.
    weights = [max(1, _syllable_count(tok, dictionary)) for tok in tokens]
    try:
        runs, _ = voiced_frame_runs(waveform, SegmentationParams())
    except NoSpeechError:
        return tuple(1 for _ in tokens)
    params = SegmentationParams()
    voiced_ms = sum((f1 - f0 + 1) * params.hop_ms for f0, f1 in runs)
    total = sum(weights)
    return tuple(max(1, voiced_ms * wgt // total) for wgt in weights)


def _syllable_count(token: str, dictionary: PronunciationDict | None) -> int:
    if dictionary is None:
        return 1
    try:
        return len(syllabify(dictionary.lookup(token)))
    except (OutOfVocabularyError, NoVowelError):
        return 1


# ---------------------------------------------------------------- mock SUTs

class OracleAdapter:
    """Answers every recording with its benign ancestor's transcript."""

    def __init__(self, name: str, registry: GroundTruthRegistry):
        self._name = name
        self._registry = registry

    @property
    def name(self) -> str:
        return self._name

    def transcribe(self, w: Waveform) -> TranscriptionResult:
        ref = self._registry.identify(w)
        if ref is None:
            return error_result(self._name, "no known ancestor")
        return TranscriptionResult(self._name, self._registry.transcript_for(ref))


class FragileAdapter:
    """Reads words off the energy contour, one burst at a time.

    Each voiced burst emits the current token, repeated when the burst
    runs long against the benign duration for that token; a token is
    consumed once its bursts have covered most of that duration. Splits,
    echoes, and extra bursts therefore surface as extra words.
    """

    def __init__(self, name: str, registry: GroundTruthRegistry):
        self._name = name
        self._registry = registry
        self._params = SegmentationParams(min_gap_ms=MOCK_MIN_GAP_MS)

    @property
    def name(self) -> str:
        return self._name

    def transcribe(self, w: Waveform) -> TranscriptionResult:
        ref = self._registry.identify(w)
        if ref is None:
            return error_result(self._name, "no known ancestor")
        tokens = self._registry.transcript_for(ref).split()
        durations = self._registry.token_durations_for(ref)
        try:
            runs, _ = voiced_frame_runs(w, self._params)
        except NoSpeechError:
            return error_result(self._name, "no speech detected")
        bursts = [(f1 - f0 + 1) * self._params.hop_ms for f0, f1 in runs]
        return TranscriptionResult(self._name, " ".join(_emit(tokens, durations, bursts)))


def _emit(tokens: Sequence[str], durations: Sequence[int], bursts: Sequence[int]) -> list[str]:
    out: list[str] = []
    k = 0
    covered = 0
    for burst in bursts:
        idx = min(k, len(tokens) - 1)
        expect = max(1, durations[idx])
        # round-half-up of burst/expect, floored at one token
        reps = max(1, (2 * burst + expect) // (2 * expect))
        out.extend([tokens[idx]] * reps)
        covered += burst
        if k < len(tokens) and ADVANCE_DEN * covered >= ADVANCE_NUM * expect:
            k += 1
            covered = 0
    return out


# ---------------------------------------------------------------- real SUTs

class HttpAdapter:
    """POSTs WAV bytes to a recognizer endpoint answering {"text": ...}."""

    def __init__(
        self,
        name: str,
        endpoint: str,
        timeout_s: float = 30.0,
        max_inflight: int = HTTP_MAX_INFLIGHT,
        attempts: int = HTTP_ATTEMPTS,
    ):
        import requests

        self._requests = requests
        self._name = name
        self._endpoint = endpoint
        self._timeout = timeout_s
        self._attempts = max(1, attempts)
        self._gate = threading.Semaphore(max_inflight)

    @property
    def name(self) -> str:
        return self._name

    def transcribe(self, w: Waveform) -> TranscriptionResult:
        payload = encode_wav(w)
        started = time.monotonic()
        last_error = "unreachable"
        with self._gate:
            for attempt in range(self._attempts):
                try:
                    resp = self._requests.post(
                        self._endpoint,
                        data=payload,
                        headers={"Content-Type": "audio/wav"},
                        timeout=self._timeout,
                    )
                    if resp.status_code >= 500:
                        last_error = f"server error {resp.status_code}"
                        continue
                    resp.raise_for_status()
                    text = normalize_text(str(resp.json().get("text", "")))
                    latency = (time.monotonic() - started) * 1000.0
                    return TranscriptionResult(self._name, text, latency_ms=latency)
                except Exception as exc:  # noqa: BLE001 - any transport failure retries
                    last_error = str(exc)
                    log.debug("attempt %d against %s failed: %s", attempt + 1, self._name, exc)
        latency = (time.monotonic() - started) * 1000.0
        return error_result(self._name, last_error, latency_ms=latency)


class SubprocessAdapter:
    """Runs a recognizer command with `{audio}` replaced by a WAV path.

    The command's stdout is the transcript; non-zero exit or a timeout
    becomes an error result rather than an exception.
    """

    def __init__(self, name: str, command: str | Sequence[str], timeout_s: float = 60.0):
        self._name = name
        self._argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not any("{audio}" in part for part in self._argv):
            raise ConfigError(f"command for {name!r} never mentions {{audio}}")
        self._timeout = timeout_s

    @property
    def name(self) -> str:
        return self._name

    def transcribe(self, w: Waveform) -> TranscriptionResult:
        started = time.monotonic()
        with tempfile.TemporaryDirectory(prefix="sut-") as tmp:
            path = Path(tmp) / "input.wav"
            save_wav(w, path)
            argv = [part.replace("{audio}", str(path)) for part in self._argv]
            try:
                proc = subprocess.run(
                    argv, capture_output=True, text=True, timeout=self._timeout
                )
            except subprocess.TimeoutExpired:
                return error_result(self._name, f"timed out after {self._timeout}s")
            except OSError as exc:
                return error_result(self._name, str(exc))
        latency = (time.monotonic() - started) * 1000.0
        if proc.returncode != 0:
            detail = proc.stderr.strip() or f"exit status {proc.returncode}"
            return error_result(self._name, detail, latency_ms=latency)
        return TranscriptionResult(
            self._name, normalize_text(proc.stdout), latency_ms=latency
        )


# ---------------------------------------------------------------- executor

def mock_oracle(name: str = "mock_oracle") -> SutDescriptor:
    return SutDescriptor(name=name, kind="mock_oracle")


def mock_fragile(name: str = "mock_fragile") -> SutDescriptor:
    return SutDescriptor(name=name, kind="mock_fragile")


def build_adapter(desc: SutDescriptor, registry: GroundTruthRegistry) -> SutAdapter:
    if desc.kind == "mock_oracle":
        return OracleAdapter(desc.name, registry)
    if desc.kind == "mock_fragile":
        return FragileAdapter(desc.name, registry)
    if desc.kind == "http":
        if not desc.endpoint:
            raise ConfigError(f"http adapter {desc.name!r} needs an endpoint")
        return HttpAdapter(
            desc.name,
            desc.endpoint,
            timeout_s=desc.timeout_ms / 1000.0,
            max_inflight=int(desc.options.get("max_inflight", HTTP_MAX_INFLIGHT)),
            attempts=desc.retries + 1,
        )
    if desc.kind == "subprocess":
        if not desc.command:
            raise ConfigError(f"subprocess adapter {desc.name!r} needs a command")
        return SubprocessAdapter(desc.name, desc.command, timeout_s=desc.timeout_ms / 1000.0)
    raise ConfigError(f"unknown recognizer kind {desc.kind!r}")


def transcribe(
    desc: SutDescriptor, w: Waveform, registry: GroundTruthRegistry | None = None
) -> TranscriptionResult:
    """One-shot recognition without keeping the adapter around.

    The mock kinds need a populated registry; real kinds ignore it.
    """
    return build_adapter(desc, registry or GroundTruthRegistry()).transcribe(w)


class SutExecutor:
    """Fans one waveform out to every adapter, results in adapter order."""

    def __init__(self, adapters: Sequence[SutAdapter]):
        names = [a.name for a in adapters]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate recognizer names in {names}")
        self._adapters = list(adapters)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self._adapters)

    def execute(self, w: Waveform) -> list[TranscriptionResult]:
        return [a.transcribe(w) for a in self._adapters]
