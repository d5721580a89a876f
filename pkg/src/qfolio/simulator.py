"""Dense statevector simulation for up to 20 qubits.

Bit order follows :mod:`qfolio.bitstrings`: character k of a bitstring is
qubit k, and amplitude index ``sum_k z_k * 2**k``.  Gate application mutates
the state's private amplitude buffer, so a StateVector belongs to one worker
at a time; independent simulations need no coordination.

Sampling uses numpy's PCG64 generator, seeded explicitly, so histograms are
reproducible across platforms.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from qfolio import kernels, tolerances
from qfolio.bitstrings import bitstring_to_array, index_to_bitstring
from qfolio.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    LengthMismatch,
    ParamLengthMismatch,
    TooManyQubits,
    UnboundParameter,
    ZeroShots,
)
from qfolio.qubo import IsingHamiltonian, QuboProblem

MAX_QUBITS = 20


class GateKind(str, enum.Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    H = "h"
    CX = "cx"
    CZ = "cz"
    DIAGONAL_PHASE = "diagonal_phase"


_ROTATIONS = {GateKind.RX, GateKind.RY, GateKind.RZ}


@dataclass(frozen=True, eq=False)
class Gate:
    """One circuit operation.

    Parameterized gates carry ``param_slot`` (an index into the bound vector)
    and ``param_scale`` (applied to the bound value); fixed-angle rotations
    carry ``angle`` instead.  DIAGONAL_PHASE holds the per-bitstring energy
    table whose values become phases ``exp(-i * value * energy)``.
    """

    kind: GateKind
    qubits: tuple[int, ...] = ()
    param_slot: int | None = None
    param_scale: float = 1.0
    angle: float | None = None
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct")

    def bound_value(self, theta: np.ndarray | None) -> float:
        if self.param_slot is not None:
            if theta is None or self.param_slot >= len(theta):
                raise UnboundParameter(f"no value bound for slot {self.param_slot}")
            return self.param_scale * float(theta[self.param_slot])
        if self.angle is None:
            raise UnboundParameter(f"{self.kind.value} gate has neither slot nor angle")
        return self.param_scale * self.angle


class StateVector:
    """n-qubit register with a dense complex128 amplitude buffer."""

    __slots__ = ("n", "amplitudes")

    def __init__(self, n: int, amplitudes: np.ndarray):
        self.n = n
        self.amplitudes = amplitudes

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


@dataclass(frozen=True)
class SampleHistogram:
    """Measurement counts keyed by bitstring."""

    counts: dict[str, int]
    shots: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("histogram counts do not sum to shots")

    def to_json(self) -> str:
        return json.dumps(
            {"counts": self.counts, "shots": self.shots, "seed": self.seed},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SampleHistogram":
        doc = json.loads(text)
        return cls(counts=dict(doc["counts"]), shots=int(doc["shots"]), seed=int(doc["seed"]))


def _check_qubit_count(n: int) -> None:
    if n < 1 or n > MAX_QUBITS:
        raise TooManyQubits(f"qubit count {n} outside 1..{MAX_QUBITS}")


def init_zero(n: int) -> StateVector:
    """|0...0> register."""
    _check_qubit_count(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def init_uniform(n: int) -> StateVector:
    """Uniform superposition over all bitstrings."""
    _check_qubit_count(n)
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    return StateVector(n, amps)


def apply_gate(state: StateVector, gate: Gate, theta: np.ndarray | None = None) -> StateVector:
    """Apply one gate in place and return the state."""
    for q in gate.qubits:
        if not 0 <= q < state.n:
            raise IndexOutOfRange(f"qubit {q} outside register of {state.n}")
    amps = state.amplitudes
    kind = gate.kind
    if kind in _ROTATIONS:
        angle = gate.bound_value(theta)
        if kind is GateKind.RX:
            kernels.apply_rx(amps, gate.qubits[0], angle)
        elif kind is GateKind.RY:
            kernels.apply_ry(amps, gate.qubits[0], angle)
        else:
            kernels.apply_rz(amps, gate.qubits[0], angle)
    elif kind is GateKind.H:
        kernels.apply_h(amps, gate.qubits[0])
    elif kind is GateKind.CX:
        kernels.apply_cx(amps, gate.qubits[0], gate.qubits[1])
    elif kind is GateKind.CZ:
        kernels.apply_cz(amps, gate.qubits[0], gate.qubits[1])
    elif kind is GateKind.DIAGONAL_PHASE:
        if gate.table is None or len(gate.table) != len(amps):
            raise DimensionMismatch("phase table does not match state dimension")
        kernels.apply_phase_table(amps, gate.bound_value(theta), gate.table)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown gate kind {kind}")
    return state


def run(circuit, theta: np.ndarray | None = None) -> StateVector:
    """Prepare ``circuit``'s state at parameters ``theta``.

    ``circuit`` needs ``n``, ``gates``, ``initial_state`` ("zero"/"uniform")
    and ``param_count``.  The returned state's norm is checked against
    tolerances.NORM_ATOL.
    """
    size = 0 if theta is None else len(theta)
    if size != circuit.param_count:
        raise ParamLengthMismatch(
            f"circuit expects {circuit.param_count} parameters, got {size}"
        )
    state = init_uniform(circuit.n) if circuit.initial_state == "uniform" else init_zero(circuit.n)
    for gate in circuit.gates:
        apply_gate(state, gate, theta)
    drift = abs(state.norm() - 1.0)
    if drift > tolerances.NORM_ATOL:
        raise RuntimeError(f"statevector norm drifted by {drift}")
    return state


def expectation_diagonal(state: StateVector, ham: IsingHamiltonian) -> float:
    """Exact expectation of a diagonal Hamiltonian: sum_z |a_z|^2 E(z)."""
    if state.n != ham.n:
        raise DimensionMismatch(f"state has {state.n} qubits, Hamiltonian {ham.n}")
    return float(state.probabilities() @ ham.energy_table())


def sample(state: StateVector, shots: int, seed: int) -> SampleHistogram:
    """Multinomial draw of ``shots`` measurements; deterministic per seed."""
    if shots < 1:
        raise ZeroShots(f"shots must be >= 1, got {shots}")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.multinomial(shots, probs)
    counts = {
        index_to_bitstring(i, state.n): int(c) for i, c in enumerate(draws) if c > 0
    }
    return SampleHistogram(counts=counts, shots=shots, seed=seed)


def sampled_cost(hist: SampleHistogram, problem: QuboProblem) -> float:
    """Shot-frequency estimate of the cost: sum_z (count_z / shots) cost(z)."""
    total = 0.0
    use_table = problem.n <= 16
    table = problem.cost_table() if use_table else None
    for bits, count in hist.counts.items():
        if len(bits) != problem.n:
            raise LengthMismatch(f"bitstring {bits!r} does not have {problem.n} bits")
        if use_table:
            cost = float(table[int(bits[::-1], 2)])
        else:
            x = bitstring_to_array(bits)
            cost = float(x @ problem.Q @ x)
        total += count * cost
    return total / hist.shots
