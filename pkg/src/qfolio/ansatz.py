"""The five parameterized circuit families used by the variational engine.

Every builder returns an immutable ParameterizedCircuit whose parameter
slots form a contiguous range [0, param_count).  Construction is a pure
function of the arguments; PauliTwoDesign additionally takes a seed that
fixes its random rotation axes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from qfolio.errors import QfolioError
from qfolio.qubo import IsingHamiltonian
from qfolio.simulator import Gate, GateKind

FAMILIES = ("qaoa", "two_local", "efficient_su2", "pauli_two_design", "real_amplitudes")


@dataclass(frozen=True, eq=False)
class ParameterizedCircuit:
    """Ordered gate list with free parameters in slots 0..param_count-1."""

    n: int
    depth: int
    gates: tuple[Gate, ...]
    param_count: int
    family: str
    initial_state: str

    def __post_init__(self):
        used = set()
        for gate in self.gates:
            if gate.param_slot is not None:
                if not 0 <= gate.param_slot < self.param_count:
                    raise QfolioError(
                        f"slot {gate.param_slot} outside 0..{self.param_count - 1}"
                    )
                used.add(gate.param_slot)
        if used != set(range(self.param_count)):
            missing = sorted(set(range(self.param_count)) - used)
            raise QfolioError(f"parameter slots never used: {missing}")
        if self.family == "qaoa":
            if self.initial_state != "uniform":
                raise QfolioError("qaoa circuits start from the uniform state")
        elif self.initial_state != "zero":
            raise QfolioError(f"{self.family} circuits start from the zero state")

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for gate in self.gates:
            counts[gate.kind.value] = counts.get(gate.kind.value, 0) + 1
        return counts

    def summary(self) -> str:
        return json.dumps(
            {
                "family": self.family,
                "n": self.n,
                "depth": self.depth,
                "param_count": self.param_count,
                "initial_state": self.initial_state,
                "gate_counts": self.gate_counts(),
            },
            sort_keys=True,
        )


def _check_depth(p: int) -> None:
    if p < 1:
        raise ValueError(f"depth must be >= 1, got {p}")


def build_qaoa(n: int, p: int, ham: IsingHamiltonian) -> ParameterizedCircuit:
    """p alternating layers exp(-i gamma_l H_C) then RX(2 beta_l) on each qubit.

    Parameters interleave as [gamma_1, beta_1, ..., gamma_p, beta_p].
    """
    _check_depth(p)
    if ham.n != n:
        raise QfolioError(f"Hamiltonian acts on {ham.n} qubits, circuit on {n}")
    table = ham.energy_table()
    gates: list[Gate] = []
    for layer in range(p):
        gates.append(
            Gate(kind=GateKind.DIAGONAL_PHASE, param_slot=2 * layer, table=table)
        )
        for q in range(n):
            gates.append(
                Gate(
                    kind=GateKind.RX,
                    qubits=(q,),
                    param_slot=2 * layer + 1,
                    param_scale=2.0,
                )
            )
    return ParameterizedCircuit(
        n=n,
        depth=p,
        gates=tuple(gates),
        param_count=2 * p,
        family="qaoa",
        initial_state="uniform",
    )


def _all_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n - 1) for j in range(i + 1, n)]


def _rotation_block(n: int, kinds: tuple[GateKind, ...], next_slot: int) -> tuple[list[Gate], int]:
    gates = []
    for kind in kinds:
        for q in range(n):
            gates.append(Gate(kind=kind, qubits=(q,), param_slot=next_slot))
            next_slot += 1
    return gates, next_slot


def _layered(
    n: int,
    p: int,
    rotation_kinds: tuple[GateKind, ...],
    entangler: GateKind,
    family: str,
) -> ParameterizedCircuit:
    # Common skeleton: p repetitions of (rotations, all-pairs entangler),
    # then one final rotation block.
    gates: list[Gate] = []
    slot = 0
    for _ in range(p):
        block, slot = _rotation_block(n, rotation_kinds, slot)
        gates.extend(block)
        for i, j in _all_pairs(n):
            gates.append(Gate(kind=entangler, qubits=(i, j)))
    block, slot = _rotation_block(n, rotation_kinds, slot)
    gates.extend(block)
    return ParameterizedCircuit(
        n=n,
        depth=p,
        gates=tuple(gates),
        param_count=slot,
        family=family,
        initial_state="zero",
    )


def build_two_local(n: int, p: int) -> ParameterizedCircuit:
    """RX+RY rotation blocks with CZ entanglement over all pairs; 2n(p+1) params."""
    _check_depth(p)
    return _layered(n, p, (GateKind.RX, GateKind.RY), GateKind.CZ, "two_local")


def build_efficient_su2(n: int, p: int) -> ParameterizedCircuit:
    """RY+RZ rotation blocks with CX entanglement over all pairs; 2n(p+1) params."""
    _check_depth(p)
    return _layered(n, p, (GateKind.RY, GateKind.RZ), GateKind.CX, "efficient_su2")


def build_real_amplitudes(n: int, p: int) -> ParameterizedCircuit:
    """RY rotation blocks with CX entanglement over all pairs; n(p+1) params.

    Every gate is a real matrix, so amplitudes stay real.
    """
    _check_depth(p)
    return _layered(n, p, (GateKind.RY,), GateKind.CX, "real_amplitudes")


_AXES = (GateKind.RX, GateKind.RY, GateKind.RZ)


def build_pauli_two_design(n: int, p: int, seed: int) -> ParameterizedCircuit:
    """Brickwork two-design: fixed RY(pi/4) layer, then p repetitions of a
    random-axis rotation layer and alternating neighbor CZ pairs, then one
    final rotation layer; n(p+1) params.

    The rotation axis of each parameterized gate is drawn from the seeded
    generator layer by layer, qubit by qubit, so equal seeds give identical
    circuits.
    """
    _check_depth(p)
    rng = np.random.Generator(np.random.PCG64(seed))
    gates: list[Gate] = [
        Gate(kind=GateKind.RY, qubits=(q,), angle=math.pi / 4) for q in range(n)
    ]
    slot = 0

    def rotation_layer() -> None:
        nonlocal slot
        for q in range(n):
            axis = _AXES[int(rng.integers(0, 3))]
            gates.append(Gate(kind=axis, qubits=(q,), param_slot=slot))
            slot += 1

    for rep in range(p):
        rotation_layer()
        first = rep % 2  # even reps pair (0,1),(2,3),...; odd reps (1,2),(3,4),...
        for i in range(first, n - 1, 2):
            gates.append(Gate(kind=GateKind.CZ, qubits=(i, i + 1)))
    rotation_layer()
    return ParameterizedCircuit(
        n=n,
        depth=p,
        gates=tuple(gates),
        param_count=slot,
        family="pauli_two_design",
        initial_state="zero",
    )


def build_family(
    family: str, n: int, p: int, ham: IsingHamiltonian | None = None, seed: int = 0
) -> ParameterizedCircuit:
    """Dispatch by family name; qaoa needs ``ham``, pauli_two_design uses ``seed``."""
    if family == "qaoa":
        if ham is None:
            raise QfolioError("qaoa requires an Ising Hamiltonian")
        return build_qaoa(n, p, ham)
    if family == "two_local":
        return build_two_local(n, p)
    if family == "efficient_su2":
        return build_efficient_su2(n, p)
    if family == "real_amplitudes":
        return build_real_amplitudes(n, p)
    if family == "pauli_two_design":
        return build_pauli_two_design(n, p, seed)
    raise QfolioError(f"unknown ansatz family {family!r}")
