"""PCM16 mono waveforms and the sample-domain edits used by the mutators.

All operations are pure: they return new Waveform instances and never
modify their inputs. Millisecond positions convert to sample indices by
round-half-up, so every edit lands on a deterministic sample boundary.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    CorruptFileError,
    InvalidParamsError,
    IoFailureError,
    OutOfRangeError,
    RateMismatchError,
    TooShortError,
    UnsupportedFormatError,
)

SAMPLE_RATE_MIN = 8000
SAMPLE_RATE_MAX = 48000

# Fixed analysis window for the overlap-add stretch.
OLA_WINDOW_MS = 25
# Crossfade consumed at each join when a segment is duplicated.
DUPLICATE_CROSSFADE_MS = 10
# Edge taper applied to inserted segments; does not change duration.
INSERT_FADE_MS = 5

_INT16_FULL_SCALE = 32768.0


@dataclass(frozen=True, eq=False)
class Waveform:
    """Immutable mono PCM16 recording."""

    samples: np.ndarray
    sample_rate_hz: int

    channels = 1

    def __post_init__(self) -> None:
        if not SAMPLE_RATE_MIN <= self.sample_rate_hz <= SAMPLE_RATE_MAX:
            raise InvalidParamsError(
                f"sample rate {self.sample_rate_hz} outside "
                f"[{SAMPLE_RATE_MIN}, {SAMPLE_RATE_MAX}]"
            )
        arr = np.asarray(self.samples)
        if arr.ndim != 1:
            raise InvalidParamsError("samples must be one-dimensional")
        if arr.dtype != np.int16:
            raise InvalidParamsError("samples must be int16")
        arr = np.ascontiguousarray(arr).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Waveform):
            return NotImplemented
        return self.sample_rate_hz == other.sample_rate_hz and np.array_equal(
            self.samples, other.samples
        )

    def __hash__(self) -> int:
        return hash((self.sample_rate_hz, self.samples.tobytes()))

    @property
    def duration_ms(self) -> int:
        return samples_to_ms(len(self), self.sample_rate_hz)


@dataclass(frozen=True)
class EnergyTrack:
    """Per-frame RMS energy of a waveform, normalized to [0, ~1]."""

    frame_ms: int
    hop_ms: int
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64)).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


def ms_to_samples(ms: int, rate: int) -> int:
    """Round-half-up conversion of a non-negative millisecond offset."""
    if ms < 0:
        raise InvalidParamsError("negative time")
    return (ms * rate + 500) // 1000


def samples_to_ms(n: int, rate: int) -> int:
    return (n * 1000 + rate // 2) // rate


def _index(w: Waveform, ms: int) -> int:
    return min(ms_to_samples(ms, w.sample_rate_hz), len(w))


def float_to_int16(x: np.ndarray) -> np.ndarray:
    """Round half up and clip into the int16 range."""
    return np.clip(np.floor(x + 0.5), -32768, 32767).astype(np.int16)


# ---------------------------------------------------------------- file io

_WAV_HEADER = struct.Struct("<4sI4s4sIHHIIHH4sI")


def load_wav(path: str | Path) -> Waveform:
    """Read a PCM16 mono WAV file.

    Unknown RIFF chunks are skipped; anything other than uncompressed
    16-bit mono in the supported rate range is rejected.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailureError(f"cannot read {path}: {exc}") from exc
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptFileError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise CorruptFileError(f"{path}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            raw = body
        pos += 8 + size + (size & 1)
    if fmt is None or raw is None:
        raise CorruptFileError(f"{path}: missing fmt or data chunk")
    if len(fmt) < 16:
        raise CorruptFileError(f"{path}: short fmt chunk")
    audio_format, n_channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt)
    if audio_format != 1:
        raise UnsupportedFormatError(f"{path}: compressed or float encoding {audio_format}")
    if n_channels != 1:
        raise UnsupportedFormatError(f"{path}: {n_channels} channels, expected mono")
    if bits != 16:
        raise UnsupportedFormatError(f"{path}: {bits}-bit samples, expected 16")
    if not SAMPLE_RATE_MIN <= rate <= SAMPLE_RATE_MAX:
        raise UnsupportedFormatError(f"{path}: rate {rate} outside supported range")
    if len(raw) % 2:
        raise CorruptFileError(f"{path}: odd data chunk length")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.int16)
    return Waveform(samples, int(rate))


def encode_wav(w: Waveform) -> bytes:
    """Serialize `w` with the canonical 44-byte header."""
    payload = np.ascontiguousarray(w.samples, dtype="<i2").tobytes()
    header = _WAV_HEADER.pack(
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,
        1,
        w.sample_rate_hz,
        w.sample_rate_hz * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    return header + payload


def save_wav(w: Waveform, path: str | Path) -> None:
    try:
        Path(path).write_bytes(encode_wav(w))
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------- edits

def insert_silence(w: Waveform, at_ms: int, dur_ms: int) -> Waveform:
    """Splice `dur_ms` of digital silence into `w` at `at_ms`."""
    if dur_ms <= 0:
        raise InvalidParamsError("silence duration must be positive")
    if not 0 <= at_ms <= w.duration_ms:
        raise OutOfRangeError(f"at_ms {at_ms} outside [0, {w.duration_ms}]")
    idx = _index(w, at_ms)
    gap = np.zeros(ms_to_samples(dur_ms, w.sample_rate_hz), dtype=np.int16)
    return Waveform(
        np.concatenate([w.samples[:idx], gap, w.samples[idx:]]), w.sample_rate_hz
    )


def _segment_indices(w: Waveform, start_ms: int, end_ms: int) -> tuple[int, int]:
    if not (0 <= start_ms < end_ms <= w.duration_ms):
        raise OutOfRangeError(
            f"segment [{start_ms}, {end_ms}] outside [0, {w.duration_ms}]"
        )
    s = _index(w, start_ms)
    e = _index(w, end_ms)
    if e <= s:
        raise OutOfRangeError(f"segment [{start_ms}, {end_ms}] spans no samples")
    return s, e


def extract_segment(w: Waveform, start_ms: int, end_ms: int) -> Waveform:
    s, e = _segment_indices(w, start_ms, end_ms)
    return Waveform(w.samples[s:e], w.sample_rate_hz)


def insert_segment(
    w: Waveform, at_ms: int, seg: Waveform, fade_ms: int = INSERT_FADE_MS
) -> Waveform:
    """Splice `seg` into `w` at `at_ms`.

    The inserted material is tapered with a linear ramp over `fade_ms` at
    each join so the splice does not click; with fade_ms=0 the samples go
    in untouched. Output length is always len(w) + len(seg).
    """
    if seg.sample_rate_hz != w.sample_rate_hz:
        raise RateMismatchError(
            f"segment rate {seg.sample_rate_hz} != {w.sample_rate_hz}"
        )
    if fade_ms < 0:
        raise InvalidParamsError("fade must be non-negative")
    if not 0 <= at_ms <= w.duration_ms:
        raise OutOfRangeError(f"at_ms {at_ms} outside [0, {w.duration_ms}]")
    idx = _index(w, at_ms)
    fade = min(ms_to_samples(fade_ms, w.sample_rate_hz), len(seg) // 2)
    if fade == 0:
        body = seg.samples
    else:
        shaped = seg.samples.astype(np.float64)
        ramp = np.arange(1, fade + 1, dtype=np.float64) / (fade + 1)
        shaped[:fade] *= ramp
        shaped[-fade:] *= ramp[::-1]
        body = float_to_int16(shaped)
    return Waveform(
        np.concatenate([w.samples[:idx], body, w.samples[idx:]]), w.sample_rate_hz
    )


def _crossfade_join(a: np.ndarray, b: np.ndarray, fade: int) -> np.ndarray:
    """Join two float blocks, overlapping `fade` samples with linear ramps."""
    if fade == 0:
        return np.concatenate([a, b])
    t = np.arange(1, fade + 1, dtype=np.float64) / (fade + 1)
    mixed = a[-fade:] * (1.0 - t) + b[:fade] * t
    return np.concatenate([a[:-fade], mixed, b[fade:]])


def duplicate_segment(
    w: Waveform,
    start_ms: int,
    end_ms: int,
    copies: int,
    crossfade_ms: int = DUPLICATE_CROSSFADE_MS,
) -> Waveform:
    """Replace the segment with `copies` back-to-back instances of itself."""
    if copies < 2:
        raise InvalidParamsError("copies must be at least 2")
    if crossfade_ms < 0 or 2 * crossfade_ms >= end_ms - start_ms:
        raise InvalidParamsError(
            f"crossfade {crossfade_ms}ms too large for segment "
            f"[{start_ms}, {end_ms}]"
        )
    s, e = _segment_indices(w, start_ms, end_ms)
    seg = w.samples[s:e]
    if crossfade_ms == 0:
        block = np.tile(seg, copies)
    else:
        fade = ms_to_samples(crossfade_ms, w.sample_rate_hz)
        seg_f = seg.astype(np.float64)
        joined = seg_f
        for _ in range(copies - 1):
            joined = _crossfade_join(joined, seg_f, fade)
        block = float_to_int16(joined)
    return Waveform(
        np.concatenate([w.samples[:s], block, w.samples[e:]]), w.sample_rate_hz
    )


def _hann_window(n: int) -> np.ndarray:
    # Periodic form: sums to a constant at half-window overlap.
    k = np.arange(n, dtype=np.float64)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)


def time_stretch_segment(
    w: Waveform, start_ms: int, end_ms: int, factor: float
) -> Waveform:
    """Stretch the segment to `factor` times its duration, preserving pitch.

    Overlap-add with a fixed 25 ms Hann window and half-window synthesis
    hop; analysis frames are phase-aligned by a half-hop similarity search
    so tonal content keeps its pitch. The stretched region's duration is
    round(len * factor) samples.
    """
    if factor < 1:
        raise InvalidParamsError("stretch factor must be >= 1")
    s, e = _segment_indices(w, start_ms, end_ms)
    seg = w.samples[s:e].astype(np.float64)
    n = seg.shape[0]
    if n < 4:
        raise InvalidParamsError("segment too short to stretch")
    w_len = ms_to_samples(OLA_WINDOW_MS, w.sample_rate_hz)
    w_len = min(w_len - (w_len & 1), n - (n & 1))
    hop_out = w_len // 2
    out_len = int(np.floor(n * float(factor) + 0.5))
    win = _hann_window(w_len)
    stretched = _kernels.ola_stretch(seg, float(factor), win, hop_out, hop_out, out_len)
    return Waveform(
        np.concatenate([w.samples[:s], float_to_int16(stretched), w.samples[e:]]),
        w.sample_rate_hz,
    )


def rms_energy(w: Waveform, frame_ms: int = 25, hop_ms: int = 10) -> EnergyTrack:
    """Frame-level RMS energy with amplitudes normalized by 2**15."""
    if hop_ms < 1 or frame_ms < hop_ms:
        raise InvalidParamsError("need frame_ms >= hop_ms >= 1")
    if w.duration_ms < frame_ms:
        raise TooShortError(
            f"waveform {w.duration_ms}ms shorter than one {frame_ms}ms frame"
        )
    n_frames = (w.duration_ms - frame_ms) // hop_ms + 1
    x = w.samples.astype(np.float64) / _INT16_FULL_SCALE
    values = _kernels.frame_rms(
        x,
        ms_to_samples(frame_ms, w.sample_rate_hz),
        ms_to_samples(hop_ms, w.sample_rate_hz),
        n_frames,
    )
    return EnergyTrack(frame_ms, hop_ms, values)
