"""Backend selection for the batched element kernels.

Two interchangeable implementations exist: a Cython extension compiled at
install time and a pure-numpy fallback. The active one is chosen once at
import, honoring FORMRELAX_BACKEND (``auto``, ``compiled`` or ``python``).
``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

from . import python_backend


def compiled_backend():
    """The compiled kernel module, or None when the extension is not built."""
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


def _select():
    choice = os.environ.get("FORMRELAX_BACKEND", "auto").lower()
    if choice == "python":
        return python_backend
    compiled = compiled_backend()
    if choice == "compiled":
        if compiled is None:
            raise RuntimeError(
                "FORMRELAX_BACKEND=compiled but the extension is not built; "
                "reinstall the package or use FORMRELAX_BACKEND=python"
            )
        return compiled
    if choice != "auto":
        raise RuntimeError(f"unknown FORMRELAX_BACKEND value '{choice}'")
    return compiled if compiled is not None else python_backend


_active = _select()


def active_backend():
    return _active


def backend_name() -> str:
    return _active.name
