"""Binary quadratic model for budgeted asset selection, and its spin form.

The selection objective ``q * x' Sigma x - mu' x`` with the budget constraint
``sum(x) = B`` folded in as the penalty ``alpha * (sum(x) - B)^2`` becomes
``x' Q x + offset`` with

    Q[i][j] = q * Sigma[i][j] + alpha                       (i != j)
    Q[i][i] = q * Sigma[i][i] - mu[i] + alpha * (1 - 2B)
    offset  = alpha * B^2

``Q`` is stored symmetric.  The spin form substitutes ``x_i = (1 - z_i) / 2``
with ``z_i = +1`` meaning "asset i not selected"; its energy reproduces
``x' Q x`` exactly (the offset stays outside, added only when reporting the
total objective).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from qfolio.bitstrings import bit_matrix, bitstring_to_array
from qfolio.errors import BudgetOutOfRange, LengthMismatch, NonPositivePenalty
from qfolio.market_data import MarketSnapshot

# Cost tables are materialized up to this size; beyond it costs are evaluated
# per bitstring.
_TABLE_MAX_QUBITS = 16


@dataclass(eq=False)
class QuboProblem:
    """Symmetric QUBO matrix with the generating parameters.

    Treat instances as immutable after construction.
    """

    n: int
    Q: np.ndarray
    offset: float
    q: float
    alpha: float
    budget: int
    _cost_table: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=np.float64)
        if self.Q.shape != (self.n, self.n):
            raise ValueError(f"Q must be {self.n}x{self.n}")
        if not np.array_equal(self.Q, self.Q.T):
            raise ValueError("Q must be symmetric")

    def cost(self, x: str | np.ndarray) -> float:
        """``x' Q x`` without the offset."""
        return qubo_cost(self, x)

    def evaluate(self, x: str | np.ndarray) -> float:
        """Total objective ``x' Q x + offset``."""
        return self.cost(x) + self.offset

    def cost_table(self) -> np.ndarray:
        """Costs (offset excluded) of all 2^n bitstrings, index little-endian."""
        if self.n > _TABLE_MAX_QUBITS:
            raise ValueError(f"cost table limited to {_TABLE_MAX_QUBITS} variables")
        if self._cost_table is None:
            x = bit_matrix(self.n)
            self._cost_table = np.einsum("ij,jk,ik->i", x, self.Q, x)
        return self._cost_table

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "Q": [float(v) for v in self.Q.reshape(-1)],
            "offset": self.offset,
            "params": {"q": self.q, "alpha": self.alpha, "budget": self.budget},
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "QuboProblem":
        doc = json.loads(text)
        n = int(doc["n"])
        return cls(
            n=n,
            Q=np.array(doc["Q"], dtype=np.float64).reshape(n, n),
            offset=float(doc["offset"]),
            q=float(doc["params"]["q"]),
            alpha=float(doc["params"]["alpha"]),
            budget=int(doc["params"]["budget"]),
        )


@dataclass(eq=False)
class IsingHamiltonian:
    """Diagonal spin Hamiltonian: linear terms, pair couplings, constant.

    ``coupling`` maps ``(i, j)`` with ``i < j`` to the ZZ coefficient.
    Treat instances as immutable after construction.
    """

    h: np.ndarray
    coupling: dict[tuple[int, int], float]
    constant: float
    _table: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=np.float64)
        for i, j in self.coupling:
            if not 0 <= i < j < self.n:
                raise ValueError(f"bad coupling index pair ({i}, {j})")

    @property
    def n(self) -> int:
        return len(self.h)

    def energy(self, bits: str | np.ndarray) -> float:
        """Energy of one bitstring (``z_i = 1 - 2 x_i``)."""
        x = bitstring_to_array(bits) if isinstance(bits, str) else np.asarray(bits, dtype=np.float64)
        if len(x) != self.n:
            raise LengthMismatch(f"expected {self.n} bits, got {len(x)}")
        z = 1.0 - 2.0 * x
        e = float(self.h @ z) + self.constant
        for (i, j), c in self.coupling.items():
            e += c * z[i] * z[j]
        return e

    def energy_table(self) -> np.ndarray:
        """Energies of all 2^n bitstrings, index little-endian. Cached."""
        if self._table is None:
            z = 1.0 - 2.0 * bit_matrix(self.n)
            e = z @ self.h + self.constant
            for (i, j), c in self.coupling.items():
                e += c * z[:, i] * z[:, j]
            self._table = e
        return self._table


def build_qubo(snapshot: MarketSnapshot, q: float, alpha: float, budget: int) -> QuboProblem:
    """Penalty-augmented selection QUBO for ``snapshot``.

    ``q`` is the risk-aversion weight, ``alpha`` the (strictly positive)
    constraint penalty, ``budget`` the required number of selected assets.
    """
    n = snapshot.n
    if n < 2:
        raise ValueError("need at least 2 assets")
    if not 1 <= budget <= n:
        raise BudgetOutOfRange(f"budget {budget} outside 1..{n}")
    if alpha <= 0:
        raise NonPositivePenalty(f"alpha must be > 0, got {alpha}")

    Q = q * snapshot.sigma + alpha * (1.0 - np.eye(n))
    Q[np.diag_indices(n)] = q * np.diag(snapshot.sigma) - snapshot.mu + alpha * (1.0 - 2.0 * budget)
    Q = (Q + Q.T) / 2.0
    return QuboProblem(n=n, Q=Q, offset=alpha * budget**2, q=q, alpha=alpha, budget=budget)


def qubo_cost(problem: QuboProblem, x: str | np.ndarray) -> float:
    """``x' Q x`` for one bitstring; the offset is the caller's business."""
    vec = bitstring_to_array(x) if isinstance(x, str) else np.asarray(x, dtype=np.float64)
    if len(vec) != problem.n:
        raise LengthMismatch(f"expected {problem.n} bits, got {len(vec)}")
    return float(vec @ problem.Q @ vec)


def to_ising(problem: QuboProblem) -> IsingHamiltonian:
    """Spin form of ``x' Q x`` under ``x_i = (1 - z_i) / 2``.

    For symmetric Q this gives ``J_ij = Q_ij / 2`` (i < j),
    ``h_i = -(Q_ii + sum_{j != i} Q_ij) / 2``, and a constant chosen so the
    energy of every bitstring equals its QUBO cost exactly.
    """
    Q = problem.Q
    n = problem.n
    row_off_diag = Q.sum(axis=1) - np.diag(Q)
    h = -(np.diag(Q) + row_off_diag) / 2.0
    coupling = {}
    for i in range(n):
        for j in range(i + 1, n):
            if Q[i, j] != 0.0:
                coupling[(i, j)] = Q[i, j] / 2.0
    constant = float(np.diag(Q).sum() / 2.0 + sum(coupling.values()))
    return IsingHamiltonian(h=h, coupling=coupling, constant=constant)
