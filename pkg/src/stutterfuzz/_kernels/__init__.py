"""Sample-domain kernels with a compiled fast path.

The native Cython module and the numpy fallback implement the same
arithmetic; summation order may differ, so results agree to float64
round-off rather than bit for bit. One process always uses one backend,
recorded in the campaign's run_meta.json sidecar.
Set STUTTERFUZZ_PURE=1 to force the fallback (used by the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("STUTTERFUZZ_PURE"):
    from . import pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        from . import pure as _impl

        BACKEND = "pure"

frame_rms = _impl.frame_rms
ola_stretch = _impl.ola_stretch


def backend() -> str:
    """Name of the kernel implementation selected at import."""
    return BACKEND
