"""Pick the compiled kernels when available; ``PARAQUBE_BACKEND=python`` forces the fallback."""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled


def _default() -> str:
    requested = os.environ.get("PARAQUBE_BACKEND", "").strip().lower()
    if requested:
        if requested not in BACKENDS:
            raise ImportError(f"PARAQUBE_BACKEND={requested!r} is not available (have {sorted(BACKENDS)})")
        return requested
    return "compiled" if "compiled" in BACKENDS else "python"


BACKEND = _default()


def kernels(name: str | None = None):
    return BACKENDS[name or BACKEND]
