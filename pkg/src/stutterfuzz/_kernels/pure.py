"""Numpy reference implementation of the hot kernels."""

from __future__ import annotations

import numpy as np

# Output positions where the accumulated window weight falls below this
# are emitted as silence instead of being divided up to full scale.
_NORM_FLOOR = 1e-8

# Correlation scores within this relative distance of the maximum count as
# ties; the earliest candidate wins. Keeps the chosen offset identical
# across backends whose float sums differ in the last bits.
_TIE_REL = 1e-6

_MIN_MATCH = 16


def frame_rms(x: np.ndarray, frame_len: int, hop_len: int, n_frames: int) -> np.ndarray:
    """Root-mean-square of `n_frames` windows of `x`, hop `hop_len` samples.

    Frames that run past the end of `x` are averaged over the samples
    actually present.
    """
    n = x.shape[0]
    out = np.empty(n_frames, dtype=np.float64)
    full = 0
    if n >= frame_len:
        full = min(n_frames, (n - frame_len) // hop_len + 1)
    if full > 0:
        windows = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop_len][:full]
        out[:full] = np.sqrt(np.mean(windows * windows, axis=1))
    for k in range(full, n_frames):
        start = k * hop_len
        seg = x[start : min(start + frame_len, n)]
        out[k] = np.sqrt(np.mean(seg * seg)) if seg.size else 0.0
    return out


def _pick_offset(scores: np.ndarray, lo: int) -> int:
    best = float(np.max(scores))
    threshold = best - _TIE_REL * max(1.0, abs(best))
    return lo + int(np.argmax(scores >= threshold))


def ola_stretch(
    x: np.ndarray,
    factor: float,
    win: np.ndarray,
    hop_out: int,
    search: int,
    out_len: int,
) -> np.ndarray:
    """Overlap-add time stretch of `x` by `factor` using window `win`.

    Synthesis frames advance by `hop_out`; analysis positions advance by
    `hop_out / factor`, each refined within +-`search` samples to the
    offset whose content best continues the previous frame, so the local
    waveform stays phase-coherent and pitch is preserved.
    """
    n = x.shape[0]
    w_len = win.shape[0]
    if out_len <= 0:
        return np.zeros(0, dtype=np.float64)
    acc = np.zeros(out_len + w_len, dtype=np.float64)
    norm = np.zeros(out_len + w_len, dtype=np.float64)
    prev = -1
    k = 0
    while k * hop_out < out_len:
        spos = k * hop_out
        nominal = int(np.floor(spos / factor + 0.5))
        nominal = min(max(nominal, 0), n - 1)
        actual = nominal
        if prev >= 0 and search > 0:
            t_start = prev + hop_out
            t_len = min(hop_out, n - t_start)
            lo = max(0, nominal - search)
            hi = min(n - t_len, nominal + search)
            if t_len >= _MIN_MATCH and hi >= lo:
                template = x[t_start : t_start + t_len]
                scores = np.correlate(x[lo : hi + t_len], template, mode="valid")
                actual = _pick_offset(scores, lo)
        avail = min(w_len, n - actual)
        acc[spos : spos + avail] += x[actual : actual + avail] * win[:avail]
        norm[spos : spos + avail] += win[:avail]
        prev = actual
        k += 1
    out = acc[:out_len]
    weight = norm[:out_len]
    covered = weight > _NORM_FLOOR
    out[covered] = out[covered] / weight[covered]
    out[~covered] = 0.0
    return out
