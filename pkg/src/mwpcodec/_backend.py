"""Kernel backend selection.

The compiled extension (mwpcodec._kernels) is preferred when importable;
otherwise the pure-Python twin (mwpcodec._kernels_py) takes over. Both
expose the same functions and produce identical bytes. Selection can be
forced with the environment variable MWP_BACKEND=c|python, or swapped at
runtime (tests, benchmarks) via use().
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _kernels_py


def _load_compiled():
    try:
        from . import _kernels  # noqa: PLC0415
        return _kernels
    except ImportError:
        return None


def _resolve_default():
    forced = os.environ.get("MWP_BACKEND", "").strip().lower()
    if forced in ("python", "py", "pure"):
        return _kernels_py
    compiled = _load_compiled()
    if forced in ("c", "compiled", "native"):
        if compiled is None:
            raise ImportError("MWP_BACKEND=c requested but mwpcodec._kernels "
                              "is not built; run: python setup.py build_ext --inplace")
        return compiled
    if forced:
        raise ValueError(f"unknown MWP_BACKEND value {forced!r}")
    return compiled if compiled is not None else _kernels_py


_active = _resolve_default()


def get_kernels():
    """The kernel module currently in effect."""
    return _active


def backend_name() -> str:
    return _active.BACKEND_ID


def available_backends() -> dict[str, object]:
    out = {"python": _kernels_py}
    compiled = _load_compiled()
    if compiled is not None:
        out["c"] = compiled
    return out


@contextmanager
def use(name: str):
    """Temporarily force a backend by name ('c' or 'python')."""
    global _active
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"backend {name!r} not available (have {sorted(backends)})")
    previous = _active
    _active = backends[name]
    try:
        yield _active
    finally:
        _active = previous
