#!/usr/bin/env python3
"""Compare the compiled statevector kernels against the pure-Python fallback.

Two views:
  * raw per-gate timings on a dense register
  * one realistic engine workload (bind + simulate a deep two-local circuit)

Usage: python benchmarks/bench_kernels.py [--qubits 16] [--reps 200]
"""
from __future__ import annotations

import argparse
import importlib
import math
import time

import numpy as np

from qfolio import _statevector_py
from qfolio import kernels

try:
    _statevector_cy = importlib.import_module("qfolio._statevector_cy")
except ImportError:
    _statevector_cy = None

KERNEL_NAMES = (
    "apply_rx",
    "apply_ry",
    "apply_rz",
    "apply_h",
    "apply_cx",
    "apply_cz",
    "apply_phase_table",
)


def _time_gate(module, name: str, n: int, reps: int) -> float:
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    fn = getattr(module, name)
    if name == "apply_phase_table":
        table = np.linspace(-1.0, 1.0, 1 << n)
        args = (amps, 0.37, table)
    elif name in ("apply_cx", "apply_cz"):
        args = (amps, 0, n - 1)
    elif name == "apply_h":
        args = (amps, n // 2)
    else:
        args = (amps, n // 2, 0.37)
    start = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - start) / reps


def _workload(module, reps: int) -> float:
    # Mirrors the hot path of one optimizer evaluation: a depth-10
    # two-local circuit on 10 qubits, rebound and resimulated each rep.
    from qfolio import ansatz, simulator

    saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    for name in KERNEL_NAMES:
        setattr(kernels, name, getattr(module, name))
    try:
        circuit = ansatz.build_two_local(10, 10)
        rng = np.random.Generator(np.random.PCG64(7))
        theta = rng.uniform(0, 2 * math.pi, size=circuit.param_count)
        start = time.perf_counter()
        for _ in range(reps):
            simulator.run(circuit, theta)
        return (time.perf_counter() - start) / reps
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--qubits", type=int, default=16)
    parser.add_argument("--reps", type=int, default=200)
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    if _statevector_cy is None:
        print("compiled extension not available; showing python fallback only\n")

    header = f"{'kernel':<20}{'python (us)':>14}"
    if _statevector_cy is not None:
        header += f"{'compiled (us)':>15}{'speedup':>10}"
    print(f"\nper-gate, n={args.qubits} qubits, {args.reps} reps")
    print(header)
    for name in KERNEL_NAMES:
        t_py = _time_gate(_statevector_py, name, args.qubits, args.reps)
        line = f"{name:<20}{t_py * 1e6:>14.2f}"
        if _statevector_cy is not None:
            t_cy = _time_gate(_statevector_cy, name, args.qubits, args.reps)
            line += f"{t_cy * 1e6:>15.2f}{t_py / t_cy:>10.2f}x"
        print(line)

    reps = max(10, args.reps // 10)
    print(f"\nfull circuit evaluation (two_local, n=10, depth=10), {reps} reps")
    t_py = _workload(_statevector_py, reps)
    print(f"{'python':<20}{t_py * 1e3:>14.3f} ms")
    if _statevector_cy is not None:
        t_cy = _workload(_statevector_cy, reps)
        print(f"{'compiled':<20}{t_cy * 1e3:>14.3f} ms{t_py / t_cy:>10.2f}x")


if __name__ == "__main__":
    main()
