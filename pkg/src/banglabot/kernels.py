"""Kernel backend selection: compiled extension if built, numpy/scipy otherwise.

The hot loops of training (the Adam parameter update and the sparse-feature
projection products) go through this indirection.  Set BANGLABOT_KERNELS=pure
or =compiled to force a backend; by default the compiled one wins when it is
importable.  `benchmarks/bench_kernels.py` compares the two.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"pure": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels


class KernelBackendError(RuntimeError):
    pass


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str | None = None):
    """Return a kernel module by name, or the active default when name is None."""
    if name is None:
        return ACTIVE
    try:
        return _BACKENDS[name]
    except KeyError:
        raise KernelBackendError(
            f"kernel backend {name!r} not available (have: {available_backends()})"
        ) from None


def _select_default():
    forced = os.environ.get("BANGLABOT_KERNELS", "").strip().lower()
    if forced:
        return get_backend(forced)
    return _BACKENDS.get("compiled", _pykernels)


ACTIVE = _select_default()
