import itertools
import json
from dataclasses import dataclass

import pytest

import importlib

bt = importlib.import_module("qfolio.backtest")

from qfolio.errors import MissingReturn, QfolioError
from qfolio.oracle import OracleResult, solve_exact

from conftest import JUNE_RETURNS, TICKERS_4, TICKERS_10, TRAILING_RETURNS


@dataclass(frozen=True)
class _FakeMeta:
    family: str
    depth: int
    seed: int


@dataclass(frozen=True)
class _FakeRun:
    top_bitstrings: tuple
    metadata: _FakeMeta


def fake_run(bits: str, family: str = "qaoa", depth: int = 2, seed: int = 0) -> _FakeRun:
    return _FakeRun(
        top_bitstrings=((bits, 0.5, -1.0),),
        metadata=_FakeMeta(family=family, depth=depth, seed=seed),
    )


class TestPortfolio:
    def test_from_bitstring_maps_positions(self):
        p = bt.Portfolio.from_bitstring("0110", TICKERS_4)
        assert p.tickers == ("GOOG", "MSFT")
        assert p.selection_bitstring == "0110"

    def test_from_tickers_builds_bitstring(self):
        p = bt.Portfolio.from_tickers(["MSFT", "GOOG"], TICKERS_4)
        assert p.selection_bitstring == "0110"
        assert p.tickers == ("GOOG", "MSFT")

    def test_key_is_sorted_and_order_free(self):
        a = bt.Portfolio.from_tickers(["MSFT", "GOOG"], TICKERS_4)
        b = bt.Portfolio.from_tickers(["GOOG", "MSFT"], TICKERS_4)
        assert a.key() == b.key() == "GOOG,MSFT"

    def test_length_mismatch(self):
        with pytest.raises(QfolioError):
            bt.Portfolio.from_bitstring("011", TICKERS_4)

    def test_empty_selection(self):
        with pytest.raises(QfolioError):
            bt.Portfolio.from_bitstring("0000", TICKERS_4)

    def test_unknown_ticker(self):
        with pytest.raises(QfolioError):
            bt.Portfolio.from_tickers(["ZZZZ"], TICKERS_4)

    def test_popcount_invariant(self):
        with pytest.raises(QfolioError):
            bt.Portfolio(tickers=("GOOG",), source="manual", selection_bitstring="0110")


class TestPortfolioReturn:
    def test_two_asset_mean(self):
        p = bt.Portfolio.from_tickers(["GOOG", "MSFT"], TICKERS_4)
        value = bt.portfolio_return(p, {"GOOG": -1.43, "MSFT": 3.34})
        assert value == pytest.approx(0.955, abs=1e-12)

    def test_five_asset_mean(self):
        p = bt.Portfolio.from_tickers(["GOOG", "MSFT", "KO", "GS", "NVDA"], TICKERS_10)
        value = bt.portfolio_return(p, JUNE_RETURNS)
        assert value == pytest.approx(1.99, abs=0.01)

    def test_single_asset_is_identity(self):
        p = bt.Portfolio.from_tickers(["GS"], TICKERS_10)
        assert bt.portfolio_return(p, JUNE_RETURNS) == JUNE_RETURNS["GS"]

    def test_missing_return(self):
        p = bt.Portfolio.from_tickers(["GOOG", "MSFT"], TICKERS_4)
        with pytest.raises(MissingReturn):
            bt.portfolio_return(p, {"GOOG": 1.0})

    def test_permutation_invariance(self):
        a = bt.Portfolio.from_tickers(["MSFT", "GOOG", "KO"], TICKERS_10)
        b = bt.Portfolio.from_tickers(["KO", "GOOG", "MSFT"], TICKERS_10)
        assert bt.portfolio_return(a, JUNE_RETURNS) == pytest.approx(
            bt.portfolio_return(b, JUNE_RETURNS), abs=1e-15
        )


class TestBacktestWindow:
    def test_per_asset_returns_on_future_window(self, future10, future_window):
        p = bt.Portfolio.from_tickers(["GOOG"], TICKERS_10)
        report = bt.backtest([p], future10, future_window)
        returns = report.asset_returns()
        assert len(returns) == 10
        for ticker, expected in JUNE_RETURNS.items():
            assert returns[ticker] == pytest.approx(expected, abs=0.01)

    def test_pair_portfolio_averages(self, future10, future_window):
        pairs = {
            ("GOOG", "MSFT"): 0.95,
            ("AAPL", "TSLA"): -3.17,
            ("GOOG", "TSLA"): -3.71,
            ("MSFT", "TSLA"): -1.33,
        }
        portfolios = [bt.Portfolio.from_tickers(list(k), TICKERS_10) for k in pairs]
        report = bt.backtest(portfolios, future10, future_window)
        for (tickers, expected), (portfolio, actual) in zip(
            pairs.items(), report.per_portfolio
        ):
            assert portfolio.tickers == tuple(
                t for t in TICKERS_10 if t in tickers
            )
            assert actual == pytest.approx(expected, abs=0.01)

    def test_five_asset_portfolio_averages(self, future10, future_window):
        cases = {
            ("GOOG", "MSFT", "KO", "GS", "AMZN"): 1.34,
            ("GOOG", "MSFT", "KO", "GS", "NVDA"): 1.99,
            ("GOOG", "AMZN", "NVDA", "GS", "KO"): 1.62,
            ("AAPL", "TSLA", "NVDA", "MS", "KO"): -0.39,
            # mean of the five June returns: (-0.35 + 3.34 + 1.47 + 7.03 - 3.71) / 5
            ("AAPL", "MSFT", "AMZN", "GS", "KO"): 1.56,
        }
        portfolios = [bt.Portfolio.from_tickers(list(k), TICKERS_10) for k in cases]
        report = bt.backtest(portfolios, future10, future_window)
        for (_, expected), (_, actual) in zip(cases.items(), report.per_portfolio):
            assert actual == pytest.approx(expected, abs=0.01)

    def test_average_is_exact_mean_of_reported_assets(self, future10, future_window):
        p = bt.Portfolio.from_tickers(["AAPL", "NVDA", "KO"], TICKERS_10)
        report = bt.backtest([p], future10, future_window)
        returns = report.asset_returns()
        expected = sum(returns[t] for t in p.tickers) / 3
        assert report.per_portfolio[0][1] == pytest.approx(expected, abs=1e-12)

    def test_ranking_descends_with_alphabetical_ties(self):
        mk = lambda *ts: bt.Portfolio.from_tickers(list(ts), TICKERS_10)
        entries = [
            (mk("MSFT", "TSLA"), 1.0),
            (mk("AAPL"), 2.0),
            (mk("GOOG"), 1.0),
            (mk("AMZN", "KO"), 1.0),
        ]
        ranked = bt.rank_portfolios(entries)
        assert [p.key() for p, _ in ranked] == [
            "AAPL",
            "AMZN,KO",
            "GOOG",
            "MSFT,TSLA",
        ]

    def test_markdown_and_json_shapes(self, future10, future_window):
        p = bt.Portfolio.from_tickers(["GOOG", "MSFT"], TICKERS_10)
        report = bt.backtest([p], future10, future_window)
        doc = json.loads(report.to_json())
        assert doc["schema"] == "qfolio.backtest_report.v1"
        assert doc["window"] == {"start": "2025-06-02", "end": "2025-06-20"}
        md = report.to_markdown()
        assert "| GS | " in md
        assert "| 1 | GOOG, MSFT | manual |" in md


class TestSubsetRank:
    def test_rank_against_independent_enumeration(self):
        returns = JUNE_RETURNS
        universe = tuple(TICKERS_10)
        target = ("GOOG", "MSFT", "KO", "GS", "NVDA")
        rank, total = bt._subset_rank(target, returns, universe)
        assert total == 252

        better = 0
        target_avg = sum(returns[t] for t in target) / 5
        for combo in itertools.combinations(universe, 5):
            avg = sum(returns[t] for t in combo) / 5
            if avg > target_avg:
                better += 1
        assert rank == better + 1

    def test_best_subset_ranks_first(self):
        universe = tuple(TICKERS_10)
        best = tuple(
            sorted(universe, key=lambda t: -JUNE_RETURNS[t])[:3]
        )
        rank, total = bt._subset_rank(best, JUNE_RETURNS, universe)
        assert (rank, total) == (1, 120)


@pytest.fixture(scope="module")
def report10(future10, future_window):
    pairs = [
        ("GOOG", "MSFT"),
        ("AAPL", "TSLA"),
        ("GOOG", "TSLA"),
        ("MSFT", "TSLA"),
    ]
    portfolios = [bt.Portfolio.from_tickers(list(k), TICKERS_10) for k in pairs]
    return bt.backtest(portfolios, future10, future_window)


class TestFeasibilitySummary:
    def test_matches_ground_truth_flag(self, report10, problem10):
        oracle = solve_exact(problem10)
        good = fake_run(oracle.feasible_best[0])
        bad = fake_run("1111100000", family="two_local", seed=1)
        _, doc = bt.feasibility_summary(
            report10,
            oracle,
            [good, bad],
            universe=TICKERS_10,
            trailing_returns=TRAILING_RETURNS,
        )
        assert doc["runs"][0]["matches_ground_truth"] is True
        assert doc["runs"][1]["matches_ground_truth"] is False
        assert doc["runs"][0]["total_subsets"] == 252

    def test_rank_recomputed_independently(self, report10, problem10):
        oracle = solve_exact(problem10)
        bits = "0110001101"
        run = fake_run(bits)
        _, doc = bt.feasibility_summary(
            report10, oracle, [run], universe=TICKERS_10
        )
        row = doc["runs"][0]
        tickers = tuple(row["tickers"])
        returns = report10.asset_returns()
        avg = sum(returns[t] for t in tickers) / len(tickers)
        assert row["future_return_pct"] == pytest.approx(avg, abs=1e-12)

        better = sum(
            1
            for combo in itertools.combinations(TICKERS_10, len(tickers))
            if sum(returns[t] for t in combo) / len(tickers) > avg
        )
        assert row["rank"] == better + 1

    def test_negative_trend_flags(self, report10, problem10):
        oracle = solve_exact(problem10)
        run = fake_run("1000000010")  # AAPL and NKE
        _, doc = bt.feasibility_summary(
            report10,
            oracle,
            [run],
            universe=TICKERS_10,
            trailing_returns=TRAILING_RETURNS,
        )
        assert doc["runs"][0]["negative_trend_flags"] == ["AAPL", "NKE"]
        assert doc["threshold_pct"] == -10.0

    def test_unique_positive_pair_is_identified(self, report10, problem10):
        oracle = solve_exact(problem10)
        md, doc = bt.feasibility_summary(report10, oracle, [], universe=TICKERS_10)
        positive = doc["positive_return_portfolios"]
        assert len(positive) == 1
        assert positive[0]["tickers"] == ["GOOG", "MSFT"]
        assert doc["unique_positive_portfolio"] == ["GOOG", "MSFT"]
        assert "GOOG, MSFT is the only evaluated portfolio" in md

    def test_markdown_run_rows(self, report10, problem10):
        oracle = solve_exact(problem10)
        run = fake_run(oracle.feasible_best[0], family="qaoa", depth=4, seed=2)
        md, _ = bt.feasibility_summary(
            report10,
            oracle,
            [run],
            universe=TICKERS_10,
            trailing_returns=TRAILING_RETURNS,
        )
        assert "| qaoa/d4/s2 |" in md
        assert "/252 |" in md

    def test_universe_required_with_runs(self, report10, problem10):
        oracle = solve_exact(problem10)
        with pytest.raises(QfolioError):
            bt.feasibility_summary(report10, oracle, [fake_run("0110001101")])

    def test_summary_without_feasible_oracle(self, report10):
        oracle = OracleResult(
            best_bitstring="0" * 10,
            best_cost=0.0,
            feasible_best=None,
            spectrum_stats=(0.0, 1.0, 0.5),
        )
        _, doc = bt.feasibility_summary(report10, oracle, [], universe=TICKERS_10)
        assert doc["oracle_feasible_best"] is None
