"""Assembly-kernel backend selection.

Prefers the compiled extension and falls back to the numpy implementation when
the extension was not built.  Both expose the same two functions; the
benchmark under benchmarks/ times them side by side.
"""

from __future__ import annotations

try:
    from . import _accel as _impl

    BACKEND = "accel"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _fallback as _impl

    BACKEND = "fallback"

bulk_energy = _impl.bulk_energy
bulk_gradient = _impl.bulk_gradient


def backend() -> str:
    """Name of the active kernel backend ('accel' or 'fallback')."""
    return BACKEND
