"""Brute-force QUBO ground truth by exhaustive bitstring enumeration.

Costs here are totals (x'Qx plus the constant offset), matching what the
variational engine reports for sampled bitstrings.  Ties break toward the
smallest integer encoding of the bitstring so results are identical across
platforms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from qfolio.bitstrings import bit_matrix, index_to_bitstring
from qfolio.errors import TooLarge
from qfolio.qubo import QuboProblem

MAX_ORACLE_QUBITS = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleResult:
    """Exhaustive-scan summary of one QUBO instance."""

    best_bitstring: str
    best_cost: float
    feasible_best: tuple[str, float] | None
    spectrum_stats: tuple[float, float, float]

    def to_json(self) -> str:
        doc = {
            "best_bitstring": self.best_bitstring,
            "best_cost": self.best_cost,
            "feasible_best": None
            if self.feasible_best is None
            else {"bitstring": self.feasible_best[0], "cost": self.feasible_best[1]},
            "spectrum_stats": {
                "min": self.spectrum_stats[0],
                "max": self.spectrum_stats[1],
                "mean": self.spectrum_stats[2],
            },
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OracleResult":
        doc = json.loads(text)
        fb = doc["feasible_best"]
        return cls(
            best_bitstring=doc["best_bitstring"],
            best_cost=float(doc["best_cost"]),
            feasible_best=None if fb is None else (fb["bitstring"], float(fb["cost"])),
            spectrum_stats=(
                float(doc["spectrum_stats"]["min"]),
                float(doc["spectrum_stats"]["max"]),
                float(doc["spectrum_stats"]["mean"]),
            ),
        )


def solve_exact(problem: QuboProblem) -> OracleResult:
    """Scan all 2^n bitstrings; also track the best string with exactly
    ``problem.budget`` ones when the budget lies in [0, n]."""
    n = problem.n
    if n > MAX_ORACLE_QUBITS:
        raise TooLarge(f"oracle limited to {MAX_ORACLE_QUBITS} variables, got {n}")
    budget = problem.budget
    track_feasible = 0 <= budget <= n

    best_idx = -1
    best_total = np.inf
    feas_idx = -1
    feas_total = np.inf
    total_min = np.inf
    total_max = -np.inf
    total_sum = 0.0
    size = 1 << n

    for start in range(0, size, _CHUNK):
        stop = min(start + _CHUNK, size)
        rows = bit_matrix(n, start, stop)
        costs = np.einsum("ij,jk,ik->i", rows, problem.Q, rows) + problem.offset
        # Ascending scan order makes argmin's first hit the smallest integer.
        k = int(np.argmin(costs))
        if costs[k] < best_total:
            best_total = float(costs[k])
            best_idx = start + k
        total_min = min(total_min, float(costs.min()))
        total_max = max(total_max, float(costs.max()))
        total_sum += float(costs.sum())
        if track_feasible:
            ones = rows.sum(axis=1)
            mask = ones == budget
            if mask.any():
                sub = np.where(mask)[0]
                j = sub[int(np.argmin(costs[sub]))]
                if costs[j] < feas_total:
                    feas_total = float(costs[j])
                    feas_idx = start + int(j)

    feasible = None
    if track_feasible and feas_idx >= 0:
        feasible = (index_to_bitstring(feas_idx, n), feas_total)
    return OracleResult(
        best_bitstring=index_to_bitstring(best_idx, n),
        best_cost=best_total,
        feasible_best=feasible,
        spectrum_stats=(total_min, total_max, total_sum / size),
    )
