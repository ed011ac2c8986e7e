"""Selects the compute backend: compiled extension kernels when available,
pure-Python kernels otherwise.

Set INAR1_BACKEND=python to force the pure backend, INAR1_BACKEND=compiled
to require the extension (import fails if it is missing).
"""

from __future__ import annotations

import os

_choice = os.environ.get("INAR1_BACKEND", "auto").strip().lower()

if _choice in ("", "auto"):
    try:
        from . import _kernels_cy as kernels  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels

        COMPILED = False
elif _choice in ("py", "python", "pure"):
    from . import _kernels_py as kernels

    COMPILED = False
elif _choice in ("c", "cy", "compiled"):
    from . import _kernels_cy as kernels  # type: ignore[attr-defined]

    COMPILED = True
else:
    raise ImportError(f"unrecognized INAR1_BACKEND value: {_choice!r}")


def using_compiled() -> bool:
    return COMPILED


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
