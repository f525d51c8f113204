"""Backend selection for the fixed-point kernels.

``LINDSTEDT_LAB_KERNELS`` picks the implementation at import time:
``auto`` (default) prefers the compiled GMP module and falls back to pure
Python, ``python`` forces the fallback, ``compiled`` fails loudly when the
extension is missing.  Both produce bit-identical integers.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    name = (name or os.environ.get("LINDSTEDT_LAB_KERNELS") or "auto").strip().lower()
    if name == "auto":
        return _BACKENDS.get("compiled", _pykernels)
    if name not in ("python", "compiled"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name not in _BACKENDS:
        raise ImportError("compiled kernels requested but lindstedt_lab._ckernels is not built")
    return _BACKENDS[name]


BACKEND = get_backend()
fft = BACKEND.fft
ValueBank = BACKEND.ValueBank
log.debug("fixed-point kernels: %s", BACKEND.NAME)
