"""Kernel backend selection.

The compiled extension (moodtunes.nn._ckernels, built from Cython) is used
when importable; otherwise the numpy fallback takes over. Set
MOODTUNES_KERNELS=python or =cython to force a backend; forcing cython
when the extension is missing raises at import.

Both backends implement the same contracts and are cross-checked by the
test suite; `python benchmarks/bench_kernels.py` compares their speed.
"""

from __future__ import annotations

import os

from . import _pykernels

_FORCED = os.environ.get("MOODTUNES_KERNELS", "").strip().lower()

if _FORCED == "python":
    _impl = _pykernels
elif _FORCED == "cython":
    from . import _ckernels as _impl  # noqa: F401
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels


def backend_name() -> str:
    return "cython" if _impl.__name__.endswith("_ckernels") else "python"


def get_backend(name: str):
    """Return the kernel module for ``name`` ("python" or "cython")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend: {name!r}")


conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool2d_forward = _impl.maxpool2d_forward
maxpool2d_backward = _impl.maxpool2d_backward
