"""Time the compiled sample kernels against the numpy fallback.

Runs both implementations on the same inputs, checks they agree to
float64 round-off, and prints per-call timings with the speedup.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --seconds 300 --repeats 9
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stutterfuzz._kernels import backend, pure

try:
    from stutterfuzz._kernels import _native as native
except ImportError:
    native = None

RATE = 16000
FRAME_LEN = 400  # 25 ms
HOP_LEN = 160  # 10 ms


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def _hann(n: int) -> np.ndarray:
    k = np.arange(n, dtype=np.float64)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)


def _report(name: str, pure_s: float, native_s: float | None, max_diff: float | None):
    print(f"{name}:")
    print(f"  pure    {pure_s * 1e3:8.3f} ms/call")
    if native_s is None:
        print("  native  not built")
    else:
        print(f"  native  {native_s * 1e3:8.3f} ms/call  ({pure_s / native_s:.1f}x vs pure)")
        print(f"  max |diff| {max_diff:.3e}")
    print()


def bench_frame_rms(seconds: int, repeats: int) -> None:
    rng = np.random.default_rng(7)
    x = rng.uniform(-1.0, 1.0, seconds * RATE)
    n_frames = (x.shape[0] - FRAME_LEN) // HOP_LEN + 1
    args = (x, FRAME_LEN, HOP_LEN, n_frames)
    pure_s = _best_of(lambda: pure.frame_rms(*args), repeats)
    native_s = max_diff = None
    if native is not None:
        native_s = _best_of(lambda: native.frame_rms(*args), repeats)
        max_diff = float(np.max(np.abs(native.frame_rms(*args) - pure.frame_rms(*args))))
    _report(f"frame_rms ({seconds}s of audio, {n_frames} frames)", pure_s, native_s, max_diff)


def bench_ola_stretch(segment_ms: int, factor: int, repeats: int) -> None:
    rng = np.random.default_rng(11)
    n = segment_ms * RATE // 1000
    t = np.arange(n, dtype=np.float64) / RATE
    seg = 12000.0 * np.sin(2.0 * np.pi * 450.0 * t) + rng.normal(0.0, 20.0, n)
    win = _hann(FRAME_LEN)
    hop = FRAME_LEN // 2
    out_len = int(np.floor(n * factor + 0.5))
    args = (seg, float(factor), win, hop, hop, out_len)
    pure_s = _best_of(lambda: pure.ola_stretch(*args), repeats)
    native_s = max_diff = None
    if native is not None:
        native_s = _best_of(lambda: native.ola_stretch(*args), repeats)
        max_diff = float(np.max(np.abs(native.ola_stretch(*args) - pure.ola_stretch(*args))))
    _report(
        f"ola_stretch ({segment_ms}ms segment, x{factor})", pure_s, native_s, max_diff
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seconds", type=int, default=120, help="signal length for frame_rms")
    parser.add_argument("--segment-ms", type=int, default=300, help="segment length for ola_stretch")
    parser.add_argument("--factor", type=int, default=3, help="stretch factor")
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeat count")
    opts = parser.parse_args(argv)

    print(f"import-time backend: {backend()}\n")
    bench_frame_rms(opts.seconds, opts.repeats)
    bench_ola_stretch(opts.segment_ms, opts.factor, opts.repeats)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
