"""Bit-order contract shared by the whole package.

Character ``k`` of a bitstring corresponds to variable (qubit) ``k``, and the
flat index of basis state ``|z>`` in an amplitude array is ``sum_k z_k * 2**k``
(little-endian).  Every module goes through these helpers so the convention
exists in exactly one place.
"""
from __future__ import annotations

import numpy as np


def index_to_bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b")[::-1]


def bitstring_to_index(bits: str) -> int:
    return int(bits[::-1], 2)


def bitstring_to_array(bits: str) -> np.ndarray:
    """Bitstring as a float 0/1 vector, entry k = variable k."""
    if bits.strip("01"):
        raise ValueError(f"not a bitstring: {bits!r}")
    return np.array([1.0 if ch == "1" else 0.0 for ch in bits])


def bit_matrix(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows are the 0/1 vectors of indices [start, stop), column k = bit k."""
    if stop is None:
        stop = 1 << n
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.float64)
