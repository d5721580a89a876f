"""Price ingestion and return statistics.

Reads long-format CSV files (``date,ticker,adj_close``), aligns tickers on a
common date grid, and produces the expected-return vector and covariance
matrix that parameterize the selection model.

Conventions (recorded in :attr:`MarketSnapshot.convention`): simple daily
returns ``P_t / P_{t-1} - 1``, sample mean, sample covariance with an N-1
denominator.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from qfolio import tolerances
from qfolio.errors import (
    EmptyWindow,
    MalformedRow,
    MissingTicker,
    NoCommonDates,
    SingleObservation,
)

CSV_HEADER = ["date", "ticker", "adj_close"]

RETURN_CONVENTION = {
    "returns": "simple_daily",
    "mean": "sample_mean",
    "covariance": "sample_cov_nminus1",
}


@dataclass(frozen=True)
class DateWindow:
    """Inclusive date range."""

    start: date
    end: date

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"window start {self.start} after end {self.end}")

    def contains(self, day: date) -> bool:
        return self.start <= day <= self.end

    @classmethod
    def parse(cls, start: str, end: str) -> "DateWindow":
        return cls(date.fromisoformat(start), date.fromisoformat(end))


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Dated adjusted closes for one ticker, strictly increasing dates."""

    ticker: str
    dates: tuple[date, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        object.__setattr__(self, "prices", prices)
        if len(self.dates) != len(prices):
            raise ValueError("dates and prices have different lengths")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError(f"{self.ticker}: dates not strictly increasing")
        if len(prices) and prices.min() <= 0:
            raise ValueError(f"{self.ticker}: non-positive price")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True, eq=False)
class MarketSnapshot:
    """Return statistics for an ordered asset universe.

    ``daily_returns`` has one row per ticker on the common date grid;
    ``mu`` and ``sigma`` are the per-asset mean and the N-1 sample
    covariance of those rows.
    """

    tickers: tuple[str, ...]
    dates: tuple[date, ...]
    daily_returns: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    convention: dict = field(default_factory=lambda: dict(RETURN_CONVENTION))

    def __post_init__(self):
        n = len(self.tickers)
        if self.mu.shape != (n,) or self.sigma.shape != (n, n):
            raise ValueError("mu/sigma dimensions disagree with ticker count")
        if not np.array_equal(self.sigma, self.sigma.T):
            raise ValueError("sigma not symmetric")
        min_eig = float(np.linalg.eigvalsh(self.sigma).min())
        if min_eig < tolerances.PSD_EIG_FLOOR:
            raise ValueError(f"sigma not positive semidefinite (min eigenvalue {min_eig})")

    @property
    def n(self) -> int:
        return len(self.tickers)


def load_prices(path: str | Path, tickers: list[str], window: DateWindow) -> list[PriceSeries]:
    """Load one PriceSeries per requested ticker, restricted to ``window``.

    Raises MissingTicker if a ticker never appears in the file, EmptyWindow if
    it appears but has fewer than two observations inside the window, and
    MalformedRow (with the 1-based line number) on schema violations.
    """
    per_ticker: dict[str, dict[date, float]] = {t: {} for t in tickers}
    seen: set[str] = set()
    wanted = set(tickers)

    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise MalformedRow(1, f"expected header {','.join(CSV_HEADER)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # tolerate trailing blank line
            if len(row) != 3:
                raise MalformedRow(line_no, f"expected 3 fields, got {len(row)}")
            raw_date, ticker, raw_price = (f.strip() for f in row)
            try:
                day = date.fromisoformat(raw_date)
            except ValueError:
                raise MalformedRow(line_no, f"bad date {raw_date!r}") from None
            try:
                price = float(raw_price)
            except ValueError:
                raise MalformedRow(line_no, f"bad price {raw_price!r}") from None
            if not np.isfinite(price) or price <= 0:
                raise MalformedRow(line_no, f"non-positive price {raw_price!r}")
            seen.add(ticker)
            if ticker not in wanted or not window.contains(day):
                continue
            if day in per_ticker[ticker]:
                raise MalformedRow(line_no, f"duplicate observation {ticker} {day}")
            per_ticker[ticker][day] = price

    series = []
    for ticker in tickers:
        obs = per_ticker[ticker]
        if not obs and ticker not in seen:
            raise MissingTicker(ticker)
        if len(obs) < 2:
            raise EmptyWindow(
                f"{ticker}: {len(obs)} observation(s) in {window.start}..{window.end}, need >= 2"
            )
        days = tuple(sorted(obs))
        series.append(PriceSeries(ticker, days, np.array([obs[d] for d in days])))
    return series


def restrict_to_window(series: PriceSeries, window: DateWindow) -> PriceSeries:
    """Sub-series with dates inside ``window``; EmptyWindow if fewer than 2 remain."""
    keep = [i for i, d in enumerate(series.dates) if window.contains(d)]
    if len(keep) < 2:
        raise EmptyWindow(
            f"{series.ticker}: {len(keep)} observation(s) in {window.start}..{window.end}, need >= 2"
        )
    return PriceSeries(
        series.ticker,
        tuple(series.dates[i] for i in keep),
        series.prices[keep],
    )


def compute_snapshot(series: list[PriceSeries]) -> MarketSnapshot:
    """Daily-return statistics on the common date grid of ``series``.

    The date grids are intersected rather than imputed.  At least two return
    observations (three common dates) are required for the N-1 covariance.
    """
    if not series:
        raise NoCommonDates("no series given")
    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    if not common:
        raise NoCommonDates("series share no dates")
    grid = tuple(sorted(common))
    if len(grid) < 3:
        raise SingleObservation(
            f"{len(grid)} common date(s) give {max(len(grid) - 1, 0)} return(s); "
            "sample covariance needs at least 2"
        )

    rows = []
    for s in series:
        lookup = dict(zip(s.dates, s.prices))
        prices = np.array([lookup[d] for d in grid])
        rows.append(prices[1:] / prices[:-1] - 1.0)
    returns = np.vstack(rows)

    mu = returns.mean(axis=1)
    sigma = np.atleast_2d(np.cov(returns, ddof=1))
    sigma = (sigma + sigma.T) / 2.0  # exact symmetry regardless of BLAS path
    return MarketSnapshot(
        tickers=tuple(s.ticker for s in series),
        dates=grid,
        daily_returns=returns,
        mu=mu,
        sigma=sigma,
    )


def period_return(series: PriceSeries) -> float:
    """Percent return between the first and last observation of the series."""
    if len(series) < 2:
        raise SingleObservation(f"{series.ticker}: need at least 2 observations")
    first = series.prices[0]
    last = series.prices[-1]
    return (last - first) / first * 100.0
