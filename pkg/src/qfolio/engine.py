"""Hybrid variational loop: bind parameters, evaluate the QUBO cost on the
simulator, update with a derivative-free optimizer, and record full traces.

Determinism contract: everything downstream of OptimizerConfig.seed is
reproducible.  The seed is split with numpy's SeedSequence into four
independent streams (initial parameters, per-evaluation measurement seeds,
the final histogram seed, optimizer noise), so exact-mode reruns serialize
byte-for-byte and sampled-mode reruns reproduce identical histograms.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from qfolio import ansatz
from qfolio.errors import QfolioError, TooLarge
from qfolio.market_data import MarketSnapshot
from qfolio.oracle import solve_exact
from qfolio.qubo import IsingHamiltonian, QuboProblem, build_qubo, to_ising
from qfolio.simulator import (
    MAX_QUBITS,
    SampleHistogram,
    expectation_diagonal,
    run,
    sample,
    sampled_cost,
)

METHODS = ("nelder_mead", "spsa")
COST_MODES = ("exact", "sampled")
_SIMPLEX_TOL = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "nelder_mead"
    max_evaluations: int = 500
    initial_spread: float = 2.0 * math.pi
    seed: int = 0
    cost_mode: str = "exact"
    shots: int = 1024

    def __post_init__(self):
        if self.method not in METHODS:
            raise QfolioError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.cost_mode not in COST_MODES:
            raise QfolioError(f"cost_mode must be one of {COST_MODES}")
        if self.max_evaluations < 1:
            raise QfolioError("max_evaluations must be >= 1")
        if self.shots < 1:
            raise QfolioError("shots must be >= 1")
        if self.initial_spread <= 0:
            raise QfolioError("initial_spread must be positive")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "max_evaluations": self.max_evaluations,
            "initial_spread": self.initial_spread,
            "seed": self.seed,
            "cost_mode": self.cost_mode,
            "shots": self.shots,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OptimizerConfig":
        return cls(
            method=doc.get("method", "nelder_mead"),
            max_evaluations=int(doc.get("max_evaluations", 500)),
            initial_spread=float(doc.get("initial_spread", 2.0 * math.pi)),
            seed=int(doc.get("seed", 0)),
            cost_mode=doc.get("cost_mode", "exact"),
            shots=int(doc.get("shots", 1024)),
        )


@dataclass(frozen=True)
class OptimizationTrace:
    """Every cost evaluation in order, successive deltas, the best point,
    and a measurement histogram at the best parameters."""

    evaluations: tuple[tuple[int, np.ndarray, float], ...]
    deltas: tuple[float, ...]
    best_theta: np.ndarray
    best_cost: float
    final_histogram: SampleHistogram
    terminated: str  # "budget" or "converged"

    def __post_init__(self):
        if not self.evaluations:
            raise QfolioError("trace needs at least one evaluation")
        if len(self.deltas) != len(self.evaluations) - 1:
            raise QfolioError("one delta per consecutive evaluation pair")
        costs = [c for _, _, c in self.evaluations]
        for i, d in enumerate(self.deltas):
            if d != costs[i + 1] - costs[i]:
                raise QfolioError("deltas must equal successive cost differences")
        if self.best_cost != min(costs):
            raise QfolioError("best cost must be the minimum recorded cost")

    def running_best(self) -> list[float]:
        out, cur = [], math.inf
        for _, _, c in self.evaluations:
            cur = min(cur, c)
            out.append(cur)
        return out


@dataclass(frozen=True)
class RunMetadata:
    family: str
    n: int
    depth: int
    seed: int
    config: OptimizerConfig


@dataclass(frozen=True)
class RunResult:
    trace: OptimizationTrace
    top_bitstrings: tuple[tuple[str, float, float], ...]
    ground_truth: tuple[str, float] | None
    metadata: RunMetadata

    def __post_init__(self):
        total = sum(p for _, p, _ in self.top_bitstrings)
        if total > 1.0 + 1e-9:
            raise QfolioError(f"top bitstring probabilities sum to {total}")

    def best_sampled_cost(self) -> float:
        return min(c for _, _, c in self.top_bitstrings)

    def to_doc(self) -> dict:
        return {
            "schema": "qfolio.run_result.v1",
            "metadata": {
                "family": self.metadata.family,
                "n": self.metadata.n,
                "depth": self.metadata.depth,
                "seed": self.metadata.seed,
                "config": self.metadata.config.to_dict(),
            },
            "trace": {
                "evaluations": [[t, c] for t, _, c in self.trace.evaluations],
                "deltas": list(self.trace.deltas),
                "best": {
                    "theta": [float(v) for v in self.trace.best_theta],
                    "cost": self.trace.best_cost,
                },
                "terminated": self.trace.terminated,
                "final_histogram": {
                    "counts": self.trace.final_histogram.counts,
                    "shots": self.trace.final_histogram.shots,
                    "seed": self.trace.final_histogram.seed,
                },
            },
            "top_bitstrings": [
                {"bitstring": b, "probability": p, "cost": c}
                for b, p, c in self.top_bitstrings
            ],
            "ground_truth": None
            if self.ground_truth is None
            else {"bitstring": self.ground_truth[0], "cost": self.ground_truth[1]},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True)


def evaluate_cost(
    circuit: ansatz.ParameterizedCircuit,
    theta: np.ndarray,
    ham: IsingHamiltonian,
    problem: QuboProblem,
    cost_mode: str = "exact",
    seed: int = 0,
    shots: int = 1024,
) -> float:
    """One cost evaluation: exact diagonal expectation, or a shot-frequency
    estimate from a fresh seeded histogram.  The two agree in expectation."""
    state = run(circuit, theta)
    if cost_mode == "exact":
        return expectation_diagonal(state, ham)
    hist = sample(state, shots, seed)
    return sampled_cost(hist, problem)


class _BudgetExhausted(Exception):
    pass


def _spawn_streams(config: OptimizerConfig):
    init_ss, eval_ss, final_ss, noise_ss = np.random.SeedSequence(config.seed).spawn(4)
    init_rng = np.random.Generator(np.random.PCG64(init_ss))
    eval_rng = np.random.Generator(np.random.PCG64(eval_ss))
    final_seed = int(np.random.Generator(np.random.PCG64(final_ss)).integers(0, 2**63))
    noise_rng = np.random.Generator(np.random.PCG64(noise_ss))
    return init_rng, eval_rng, final_seed, noise_rng


def minimize(
    circuit: ansatz.ParameterizedCircuit,
    ham: IsingHamiltonian,
    problem: QuboProblem,
    config: OptimizerConfig,
) -> OptimizationTrace:
    """Run the configured optimizer from a seeded start; record every
    evaluation.  Budget exhaustion is a normal termination, flagged as
    ``terminated="budget"``."""
    init_rng, eval_rng, final_seed, noise_rng = _spawn_streams(config)
    theta0 = init_rng.uniform(0.0, config.initial_spread, size=circuit.param_count)
    records: list[tuple[int, np.ndarray, float]] = []

    def objective(theta: np.ndarray) -> float:
        if len(records) >= config.max_evaluations:
            raise _BudgetExhausted
        eval_seed = int(eval_rng.integers(0, 2**63))
        cost = evaluate_cost(
            circuit, theta, ham, problem, config.cost_mode, eval_seed, config.shots
        )
        records.append((len(records), np.array(theta, dtype=float), cost))
        return cost

    if config.method == "nelder_mead":
        terminated = "converged"
        try:
            scipy.optimize.minimize(
                objective,
                theta0,
                method="Nelder-Mead",
                options={
                    "xatol": _SIMPLEX_TOL,
                    "fatol": _SIMPLEX_TOL,
                    "maxiter": 10**9,
                    "maxfev": 10**9,
                },
            )
        except _BudgetExhausted:
            terminated = "budget"
    else:
        terminated = _spsa(objective, theta0, config, noise_rng)
        if len(records) >= config.max_evaluations:
            terminated = "budget"

    best_t = min(range(len(records)), key=lambda i: records[i][2])
    best_theta = records[best_t][1]
    best_cost = records[best_t][2]
    deltas = tuple(
        records[i][2] - records[i - 1][2] for i in range(1, len(records))
    )
    final_state = run(circuit, best_theta)
    hist = sample(final_state, config.shots, final_seed)
    return OptimizationTrace(
        evaluations=tuple(records),
        deltas=deltas,
        best_theta=best_theta,
        best_cost=best_cost,
        final_histogram=hist,
        terminated=terminated,
    )


def _spsa(objective, theta0, config: OptimizerConfig, rng) -> str:
    # Standard decaying-gain schedule; two evaluations per iteration, one
    # leading evaluation at theta0 so a budget of 1 still records a point.
    theta = np.array(theta0, dtype=float)
    objective(theta)
    iters = (config.max_evaluations - 1) // 2
    if iters == 0:
        return "converged"
    alpha, gamma = 0.602, 0.101
    c0 = 0.1
    big_a = 0.1 * iters
    a0 = 0.1 * (big_a + 1.0) ** alpha
    try:
        for k in range(iters):
            ak = a0 / (k + 1.0 + big_a) ** alpha
            ck = c0 / (k + 1.0) ** gamma
            delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
            plus = objective(theta + ck * delta)
            minus = objective(theta - ck * delta)
            ghat = (plus - minus) / (2.0 * ck) * delta
            theta = theta - ak * ghat
    except _BudgetExhausted:
        return "budget"
    return "converged"


def _top_bitstrings(
    hist: SampleHistogram, problem: QuboProblem
) -> tuple[tuple[str, float, float], ...]:
    table = problem.cost_table() if problem.n <= 16 else None
    rows = []
    for bits, count in hist.counts.items():
        prob = count / hist.shots
        if table is not None:
            cost = float(table[int(bits[::-1], 2)]) + problem.offset
        else:
            x = np.array([1.0 if ch == "1" else 0.0 for ch in bits])
            cost = float(x @ problem.Q @ x) + problem.offset
        rows.append((bits, prob, cost))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return tuple(rows)


def run_single(
    family: str,
    depth: int,
    seed: int,
    ham: IsingHamiltonian,
    problem: QuboProblem,
    config: OptimizerConfig,
    ground_truth: tuple[str, float] | None,
) -> RunResult:
    """One (family, depth, seed) cell of the grid."""
    circuit = ansatz.build_family(family, problem.n, depth, ham=ham, seed=seed)
    run_config = replace(config, seed=seed)
    trace = minimize(circuit, ham, problem, run_config)
    return RunResult(
        trace=trace,
        top_bitstrings=_top_bitstrings(trace.final_histogram, problem),
        ground_truth=ground_truth,
        metadata=RunMetadata(
            family=family, n=problem.n, depth=depth, seed=seed, config=run_config
        ),
    )


def run_experiment_grid(
    snapshot: MarketSnapshot,
    *,
    q: float,
    alpha: float,
    budget: int,
    families: list[str],
    depths: list[int],
    seeds: list[int],
    config: OptimizerConfig,
    out_dir: str | None = None,
    jobs: int = 1,
) -> list[RunResult]:
    """One RunResult per (family, depth, seed), in that nesting order.

    Cells are independent; ``jobs`` bounds the worker threads.  When
    ``out_dir`` is set, each result lands at <family>/<depth>/<seed>/result.json
    and the plot-ready convergence.csv / histogram.csv are written at the root.
    """
    if not families or not depths or not seeds:
        raise QfolioError("families, depths, and seeds must be non-empty")
    for family in families:
        if family not in ansatz.FAMILIES:
            raise QfolioError(f"unknown ansatz family {family!r}")
    problem = build_qubo(snapshot, q=q, alpha=alpha, budget=budget)
    if problem.n > MAX_QUBITS:
        raise TooLarge(f"universe needs {problem.n} qubits; simulator capped at {MAX_QUBITS}")
    ham = to_ising(problem)
    ham.energy_table()  # precompute shared read-only tables before threading
    if problem.n <= 16:
        problem.cost_table()
    ground_truth: tuple[str, float] | None = None
    if problem.n <= 16:
        exact = solve_exact(problem)
        ground_truth = (exact.best_bitstring, exact.best_cost)

    tasks = [(f, d, s) for f in families for d in depths for s in seeds]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run_single, f, d, s, ham, problem, config, ground_truth)
                for f, d, s in tasks
            ]
            results = [fut.result() for fut in futures]
    else:
        results = [
            run_single(f, d, s, ham, problem, config, ground_truth) for f, d, s in tasks
        ]

    if out_dir is not None:
        for res in results:
            meta = res.metadata
            cell = os.path.join(out_dir, meta.family, str(meta.depth), str(meta.seed))
            os.makedirs(cell, exist_ok=True)
            with open(os.path.join(cell, "result.json"), "w", encoding="utf-8") as fh:
                fh.write(res.to_json())
                fh.write("\n")
        write_convergence_csv(os.path.join(out_dir, "convergence.csv"), results)
        write_histogram_csv(os.path.join(out_dir, "histogram.csv"), results)
    return results


def write_convergence_csv(path: str, results: list[RunResult]) -> None:
    """Long-format per-evaluation costs: family, depth, seed, t, cost."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "depth", "seed", "t", "cost"])
        for res in results:
            meta = res.metadata
            for t, _, cost in res.trace.evaluations:
                writer.writerow([meta.family, meta.depth, meta.seed, t, repr(cost)])


def write_histogram_csv(path: str, results: list[RunResult]) -> None:
    """Final-state histograms averaged over seeds per (family, depth)."""
    groups: dict[tuple[str, int], list[RunResult]] = {}
    order: list[tuple[str, int]] = []
    for res in results:
        key = (res.metadata.family, res.metadata.depth)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(res)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "depth", "bitstring", "probability"])
        for key in order:
            runs = groups[key]
            acc: dict[str, float] = {}
            for res in runs:
                for bits, prob, _ in res.top_bitstrings:
                    acc[bits] = acc.get(bits, 0.0) + prob
            for bits in sorted(acc):
                writer.writerow([key[0], key[1], bits, repr(acc[bits] / len(runs))])
