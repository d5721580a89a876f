"""Quantum-inspired portfolio selection: QUBO construction, simulated
variational solvers, an exact oracle, and future-window backtesting."""

from qfolio.ansatz import (
    FAMILIES,
    ParameterizedCircuit,
    build_efficient_su2,
    build_family,
    build_pauli_two_design,
    build_qaoa,
    build_real_amplitudes,
    build_two_local,
)
from qfolio.backtest import (
    BacktestReport,
    Portfolio,
    backtest,
    feasibility_summary,
    portfolio_return,
)
from qfolio.engine import (
    OptimizationTrace,
    OptimizerConfig,
    RunMetadata,
    RunResult,
    evaluate_cost,
    minimize,
    run_experiment_grid,
)
from qfolio.errors import QfolioError
from qfolio.market_data import (
    DateWindow,
    MarketSnapshot,
    PriceSeries,
    compute_snapshot,
    load_prices,
    period_return,
    restrict_to_window,
)
from qfolio.oracle import OracleResult, solve_exact
from qfolio.qubo import IsingHamiltonian, QuboProblem, build_qubo, qubo_cost, to_ising
from qfolio.simulator import (
    Gate,
    GateKind,
    SampleHistogram,
    StateVector,
    apply_gate,
    expectation_diagonal,
    init_uniform,
    init_zero,
    run,
    sample,
    sampled_cost,
)

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "ParameterizedCircuit",
    "build_efficient_su2",
    "build_family",
    "build_pauli_two_design",
    "build_qaoa",
    "build_real_amplitudes",
    "build_two_local",
    "BacktestReport",
    "Portfolio",
    "backtest",
    "feasibility_summary",
    "portfolio_return",
    "OptimizationTrace",
    "OptimizerConfig",
    "RunMetadata",
    "RunResult",
    "evaluate_cost",
    "minimize",
    "run_experiment_grid",
    "QfolioError",
    "DateWindow",
    "MarketSnapshot",
    "PriceSeries",
    "compute_snapshot",
    "load_prices",
    "period_return",
    "restrict_to_window",
    "OracleResult",
    "solve_exact",
    "IsingHamiltonian",
    "QuboProblem",
    "build_qubo",
    "qubo_cost",
    "to_ising",
    "Gate",
    "GateKind",
    "SampleHistogram",
    "StateVector",
    "apply_gate",
    "expectation_diagonal",
    "init_uniform",
    "init_zero",
    "run",
    "sample",
    "sampled_cost",
    "__version__",
]
