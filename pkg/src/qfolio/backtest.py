"""Quantitative feasibility evaluation on a held-out future window.

A Portfolio is an unweighted ticker set; its future return is the arithmetic
mean of its constituents' percent returns over the window.  Reports rank
portfolios deterministically (return descending, ties broken alphabetically
by the joined ticker string) and emit both Markdown and JSON.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from qfolio.errors import MissingReturn, QfolioError
from qfolio.market_data import DateWindow, PriceSeries, period_return, restrict_to_window
from qfolio.oracle import OracleResult

MANUAL = "manual"
NEGATIVE_TREND_THRESHOLD = -10.0


@dataclass(frozen=True)
class Portfolio:
    """Selected tickers in universe order plus the bitstring that chose them."""

    tickers: tuple[str, ...]
    source: str
    selection_bitstring: str

    def __post_init__(self):
        if not self.tickers:
            raise QfolioError("portfolio needs at least one ticker")
        if self.selection_bitstring.count("1") != len(self.tickers):
            raise QfolioError("bitstring popcount must equal ticker count")

    @classmethod
    def from_bitstring(
        cls, bits: str, universe: list[str] | tuple[str, ...], source: str = MANUAL
    ) -> "Portfolio":
        if len(bits) != len(universe):
            raise QfolioError(
                f"bitstring length {len(bits)} does not match universe {len(universe)}"
            )
        chosen = tuple(t for t, b in zip(universe, bits) if b == "1")
        return cls(tickers=chosen, source=source, selection_bitstring=bits)

    @classmethod
    def from_tickers(
        cls,
        tickers: list[str] | tuple[str, ...],
        universe: list[str] | tuple[str, ...],
        source: str = MANUAL,
    ) -> "Portfolio":
        wanted = set(tickers)
        unknown = wanted - set(universe)
        if unknown:
            raise QfolioError(f"tickers not in universe: {sorted(unknown)}")
        bits = "".join("1" if t in wanted else "0" for t in universe)
        return cls.from_bitstring(bits, universe, source)

    def key(self) -> str:
        return ",".join(sorted(self.tickers))


@dataclass(frozen=True)
class BacktestReport:
    """Per-asset window returns plus per-portfolio averages and a ranking."""

    window: DateWindow
    per_asset: tuple[tuple[str, float, float, float], ...]
    per_portfolio: tuple[tuple[Portfolio, float], ...]
    ranking: tuple[tuple[Portfolio, float], ...]

    def asset_returns(self) -> dict[str, float]:
        return {ticker: ret for ticker, _, _, ret in self.per_asset}

    def to_doc(self) -> dict:
        return {
            "schema": "qfolio.backtest_report.v1",
            "window": {"start": self.window.start.isoformat(), "end": self.window.end.isoformat()},
            "per_asset": [
                {"ticker": t, "start_price": s, "end_price": e, "return_pct": r}
                for t, s, e, r in self.per_asset
            ],
            "per_portfolio": [
                {
                    "tickers": list(p.tickers),
                    "source": p.source,
                    "bitstring": p.selection_bitstring,
                    "average_return_pct": r,
                }
                for p, r in self.per_portfolio
            ],
            "ranking": [
                {"tickers": list(p.tickers), "average_return_pct": r}
                for p, r in self.ranking
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True)

    def to_markdown(self) -> str:
        lines = [
            f"# Backtest {self.window.start.isoformat()} to {self.window.end.isoformat()}",
            "",
            "## Per-asset returns",
            "",
            "| Ticker | Start price | End price | Return % |",
            "| --- | ---: | ---: | ---: |",
        ]
        for t, s, e, r in self.per_asset:
            lines.append(f"| {t} | {s:.2f} | {e:.2f} | {r:.2f} |")
        lines += [
            "",
            "## Portfolio ranking",
            "",
            "| Rank | Portfolio | Source | Avg return % |",
            "| ---: | --- | --- | ---: |",
        ]
        for rank, (p, r) in enumerate(self.ranking, start=1):
            lines.append(f"| {rank} | {', '.join(p.tickers)} | {p.source} | {r:.2f} |")
        lines.append("")
        return "\n".join(lines)


def portfolio_return(portfolio: Portfolio, window_returns: dict[str, float]) -> float:
    """Unweighted arithmetic mean of the constituents' percent returns."""
    total = 0.0
    for ticker in portfolio.tickers:
        if ticker not in window_returns:
            raise MissingReturn(ticker)
        total += window_returns[ticker]
    return total / len(portfolio.tickers)


def rank_portfolios(
    entries: list[tuple[Portfolio, float]]
) -> tuple[tuple[Portfolio, float], ...]:
    return tuple(sorted(entries, key=lambda e: (-e[1], e[0].key())))


def backtest(
    portfolios: list[Portfolio], prices: list[PriceSeries], window: DateWindow
) -> BacktestReport:
    """Score portfolios on the window using per-asset period returns."""
    per_asset = []
    returns: dict[str, float] = {}
    for series in prices:
        clipped = restrict_to_window(series, window)
        ret = period_return(clipped)
        per_asset.append(
            (series.ticker, float(clipped.prices[0]), float(clipped.prices[-1]), ret)
        )
        returns[series.ticker] = ret
    per_portfolio = [(p, portfolio_return(p, returns)) for p in portfolios]
    return BacktestReport(
        window=window,
        per_asset=tuple(per_asset),
        per_portfolio=tuple(per_portfolio),
        ranking=rank_portfolios(per_portfolio),
    )


def _subset_rank(
    tickers: tuple[str, ...], returns: dict[str, float], universe: tuple[str, ...]
) -> tuple[int, int]:
    # Rank of this ticker set among all same-size subsets of the universe,
    # 1 = highest future return, ties broken alphabetically.
    k = len(tickers)
    scored = []
    for combo in itertools.combinations(universe, k):
        avg = sum(returns[t] for t in combo) / k
        scored.append((combo, avg))
    scored.sort(key=lambda e: (-e[1], ",".join(e[0])))
    target = tuple(sorted(tickers))
    for pos, (combo, _) in enumerate(scored, start=1):
        if tuple(sorted(combo)) == target:
            return pos, len(scored)
    raise QfolioError(f"portfolio {tickers} not found among {len(scored)} subsets")


def feasibility_summary(
    report: BacktestReport,
    oracle: OracleResult,
    runs: list,
    *,
    universe: tuple[str, ...] | list[str] | None = None,
    trailing_returns: dict[str, float] | None = None,
    threshold: float = NEGATIVE_TREND_THRESHOLD,
) -> tuple[str, dict]:
    """Compare algorithm-selected portfolios against the oracle and against
    every same-size alternative on the future window.

    Returns (markdown text, JSON-ready dict).  ``runs`` holds RunResult
    objects; ``universe`` maps their bitstrings to tickers.  Constituents
    whose trailing return is below ``threshold`` percent are flagged.
    """
    returns = report.asset_returns()
    trailing = trailing_returns or {}
    feasible_bits = None if oracle.feasible_best is None else oracle.feasible_best[0]

    run_rows = []
    if runs and universe is None:
        raise QfolioError("universe is required to interpret run bitstrings")
    for res in runs:
        bits = res.top_bitstrings[0][0]
        portfolio = Portfolio.from_bitstring(
            bits,
            tuple(universe),
            source=f"{res.metadata.family}/d{res.metadata.depth}/s{res.metadata.seed}",
        )
        future = portfolio_return(portfolio, returns)
        rank, total = _subset_rank(portfolio.tickers, returns, tuple(universe))
        flagged = sorted(
            t for t in portfolio.tickers if trailing.get(t, 0.0) < threshold
        )
        run_rows.append(
            {
                "family": res.metadata.family,
                "depth": res.metadata.depth,
                "seed": res.metadata.seed,
                "bitstring": bits,
                "tickers": list(portfolio.tickers),
                "matches_ground_truth": bits == feasible_bits,
                "future_return_pct": future,
                "rank": rank,
                "total_subsets": total,
                "negative_trend_flags": flagged,
            }
        )

    positive = [
        {"tickers": list(p.tickers), "average_return_pct": r}
        for p, r in report.ranking
        if r > 0.0
    ]
    doc = {
        "schema": "qfolio.feasibility_summary.v1",
        "threshold_pct": threshold,
        "oracle_feasible_best": None
        if oracle.feasible_best is None
        else {"bitstring": oracle.feasible_best[0], "cost": oracle.feasible_best[1]},
        "runs": run_rows,
        "positive_return_portfolios": positive,
        "unique_positive_portfolio": positive[0]["tickers"] if len(positive) == 1 else None,
    }

    lines = ["# Feasibility summary", ""]
    if run_rows:
        lines += [
            "| Run | Portfolio | Matches oracle | Future % | Rank | Flags |",
            "| --- | --- | --- | ---: | --- | --- |",
        ]
        for row in run_rows:
            run_id = f"{row['family']}/d{row['depth']}/s{row['seed']}"
            flags = ", ".join(row["negative_trend_flags"]) or "-"
            lines.append(
                f"| {run_id} | {', '.join(row['tickers'])} | {row['matches_ground_truth']} "
                f"| {row['future_return_pct']:.2f} | {row['rank']}/{row['total_subsets']} | {flags} |"
            )
        lines.append("")
    if positive:
        lines.append("Positive-return portfolios on the future window:")
        for entry in positive:
            lines.append(
                f"- {', '.join(entry['tickers'])}: {entry['average_return_pct']:.2f} %"
            )
        if len(positive) == 1:
            lines.append("")
            lines.append(
                f"{', '.join(positive[0]['tickers'])} is the only evaluated portfolio "
                "with a positive return on this window."
            )
    else:
        lines.append("No evaluated portfolio had a positive return on this window.")
    lines.append("")
    return "\n".join(lines), doc
