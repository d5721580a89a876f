"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
numpy fallback is used.  ``QFOLIO_BACKEND=python`` forces the fallback and
``QFOLIO_BACKEND=compiled`` makes a missing extension a hard error (useful
for benchmarking and CI).
"""
from __future__ import annotations

import os

from qfolio import _statevector_py

_forced = os.environ.get("QFOLIO_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _statevector_py
    BACKEND = "python"
else:
    try:
        from qfolio import _statevector_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise
        _impl = _statevector_py
        BACKEND = "python"

apply_rx = _impl.apply_rx
apply_ry = _impl.apply_ry
apply_rz = _impl.apply_rz
apply_h = _impl.apply_h
apply_cx = _impl.apply_cx
apply_cz = _impl.apply_cz
apply_phase_table = _impl.apply_phase_table
