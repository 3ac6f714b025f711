"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set APML_FORCE_PY=1 to force the fallback (used by tests and benchmarks).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("APML_FORCE_PY"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
residue_log_sums = _impl.residue_log_sums
conv_prefix = _impl.conv_prefix

__all__ = ["BACKEND", "residue_log_sums", "conv_prefix", "_pykernels"]
