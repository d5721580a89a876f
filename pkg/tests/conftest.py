import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from qfolio.market_data import DateWindow, PriceSeries, compute_snapshot, load_prices
from qfolio.qubo import build_qubo

REPO = Path(__file__).resolve().parent.parent
PRICES_CSV = REPO / "data" / "prices.csv"

TICKERS_10 = ["AAPL", "GOOG", "MSFT", "TSLA", "AMZN", "NVDA", "GS", "MS", "NKE", "KO"]
TICKERS_4 = ["AAPL", "GOOG", "MSFT", "TSLA"]

# six-month percent returns, Dec 2 2024 to May 30 2025
TRAILING_RETURNS = {
    "AAPL": -15.9670619,
    "GOOG": 0.152181089,
    "MSFT": 7.22769294,
    "TSLA": -2.976842006,
    "AMZN": -2.705145371,
    "NVDA": -2.509015494,
    "GS": 0.785299331,
    "MS": -0.85018393,
    "NKE": -23.00333043,
    "KO": 14.11164434,
}

# June 2-20 2025 percent returns at display precision
JUNE_RETURNS = {
    "AAPL": -0.35,
    "GOOG": -1.43,
    "MSFT": 3.34,
    "TSLA": -5.99,
    "AMZN": 1.47,
    "NVDA": 4.72,
    "GS": 7.03,
    "MS": 3.36,
    "NKE": -2.89,
    "KO": -3.71,
}


def make_series(ticker: str, prices, start=dt.date(2025, 1, 6)) -> PriceSeries:
    """Weekday-spaced series starting at ``start`` with given prices."""
    dates = []
    day = start
    while len(dates) < len(prices):
        if day.weekday() < 5:
            dates.append(day)
        day += dt.timedelta(days=1)
    return PriceSeries(
        ticker=ticker, dates=tuple(dates), prices=np.asarray(prices, dtype=float)
    )


@pytest.fixture(scope="session")
def prices_csv() -> Path:
    assert PRICES_CSV.exists(), "data/prices.csv missing; run scripts/generate_sample_prices.py"
    return PRICES_CSV


@pytest.fixture(scope="session")
def train_window() -> DateWindow:
    return DateWindow.parse("2024-12-02", "2025-05-30")


@pytest.fixture(scope="session")
def future_window() -> DateWindow:
    return DateWindow.parse("2025-06-02", "2025-06-20")


@pytest.fixture(scope="session")
def series4(prices_csv, train_window):
    return load_prices(prices_csv, TICKERS_4, train_window)


@pytest.fixture(scope="session")
def series10(prices_csv, train_window):
    return load_prices(prices_csv, TICKERS_10, train_window)


@pytest.fixture(scope="session")
def future10(prices_csv, future_window):
    return load_prices(prices_csv, TICKERS_10, future_window)


@pytest.fixture(scope="session")
def snapshot4(series4):
    return compute_snapshot(series4)


@pytest.fixture(scope="session")
def snapshot10(series10):
    return compute_snapshot(series10)


@pytest.fixture(scope="session")
def problem4(snapshot4):
    return build_qubo(snapshot4, q=0.5, alpha=2.0, budget=2)


@pytest.fixture(scope="session")
def problem10(snapshot10):
    return build_qubo(snapshot10, q=0.5, alpha=5.0, budget=5)


def random_qubo(rng: np.random.Generator, n: int, scale: float = 1.0):
    """Symmetric random QuboProblem for property tests."""
    from qfolio.qubo import QuboProblem

    raw = rng.normal(0.0, scale, size=(n, n))
    Q = (raw + raw.T) / 2.0
    return QuboProblem(
        n=n,
        Q=Q,
        offset=float(rng.normal()),
        q=1.0,
        alpha=1.0,
        budget=max(1, n // 2),
    )
