"""Pure-numpy amplitude kernels, the fallback backend.

Amplitude arrays are little-endian (bit k of the flat index is qubit k) and
C-contiguous complex128.  Every kernel mutates ``amps`` in place; callers own
the buffer.  The compiled backend in ``_statevector_cy`` implements the same
signatures.
"""
from __future__ import annotations

import numpy as np


def _split(amps: np.ndarray, qubit: int) -> np.ndarray:
    # axis 1 of the view is bit `qubit` of the flat index
    return amps.reshape(-1, 2, 1 << qubit)


def _apply_1q(amps: np.ndarray, qubit: int, m00, m01, m10, m11) -> None:
    v = _split(amps, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :].copy()
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def apply_rx(amps: np.ndarray, qubit: int, theta: float) -> None:
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    _apply_1q(amps, qubit, c, -1j * s, -1j * s, c)


def apply_ry(amps: np.ndarray, qubit: int, theta: float) -> None:
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    _apply_1q(amps, qubit, c, -s, s, c)


def apply_rz(amps: np.ndarray, qubit: int, theta: float) -> None:
    v = _split(amps, qubit)
    v[:, 0, :] *= np.exp(-0.5j * theta)
    v[:, 1, :] *= np.exp(0.5j * theta)


def apply_h(amps: np.ndarray, qubit: int) -> None:
    r = 1.0 / np.sqrt(2.0)
    _apply_1q(amps, qubit, r, r, r, -r)


def _split2(amps: np.ndarray, qa: int, qb: int):
    hi, lo = (qa, qb) if qa > qb else (qb, qa)
    # axes: (high bits, bit hi, middle bits, bit lo, low bits)
    return amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo), hi


def apply_cx(amps: np.ndarray, control: int, target: int) -> None:
    v, hi = _split2(amps, control, target)
    if control == hi:
        tmp = v[:, 1, :, 0, :].copy()
        v[:, 1, :, 0, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp
    else:
        tmp = v[:, 0, :, 1, :].copy()
        v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp


def apply_cz(amps: np.ndarray, qa: int, qb: int) -> None:
    v, _ = _split2(amps, qa, qb)
    v[:, 1, :, 1, :] *= -1.0


def apply_phase_table(amps: np.ndarray, gamma: float, energies: np.ndarray) -> None:
    amps *= np.exp((-1j * gamma) * energies)
