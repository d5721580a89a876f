#!/usr/bin/env python3
"""Regenerate data/prices.csv.

Synthetic daily adjusted closes for ten tickers over Dec 2024 - Jun 2025.
Each series is a seeded geometric Brownian bridge in log space, pinned
exactly to four anchor prices per ticker (the window endpoints), so period
returns over the two windows of interest are fixed by construction while
the interior path supplies realistic daily return variation.

Deterministic: rerunning this script reproduces the committed file byte
for byte.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
import pathlib

import numpy as np

SEED = 20250601

# ticker -> (2024-12-02, 2025-05-30, 2025-06-02, 2025-06-20) anchor closes
ANCHORS = {
    "AAPL": (239.013428, 200.850006, 201.70, 201.00),
    "GOOG": (172.380157, 172.642487, 170.17, 167.73),
    "MSFT": (429.329376, 460.359985, 461.97, 477.40),
    "TSLA": (357.089996, 346.459991, 342.69, 322.16),
    "AMZN": (210.710007, 205.009995, 206.65, 209.69),
    "NVDA": (138.598068, 135.120621, 137.37, 143.85),
    "GS": (595.771423, 600.450012, 598.72, 640.80),
    "MS": (129.127823, 128.029999, 128.40, 132.71),
    "NKE": (78.172211, 60.189999, 61.57, 59.79),
    "KO": (62.737671, 71.590988, 71.49, 68.84),
}

# daily log-return volatility per ticker
VOLS = {
    "AAPL": 0.018,
    "GOOG": 0.017,
    "MSFT": 0.015,
    "TSLA": 0.035,
    "AMZN": 0.020,
    "NVDA": 0.030,
    "GS": 0.015,
    "MS": 0.016,
    "NKE": 0.020,
    "KO": 0.010,
}

TRAIN = (dt.date(2024, 12, 2), dt.date(2025, 5, 30))
FUTURE = (dt.date(2025, 6, 2), dt.date(2025, 6, 20))


def weekdays(start: dt.date, end: dt.date) -> list[dt.date]:
    days = []
    day = start
    while day <= end:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def bridge(rng: np.random.Generator, start: float, end: float, steps: int, vol: float) -> np.ndarray:
    """Log-space Brownian bridge from start to end over ``steps`` intervals;
    both endpoints exact."""
    log_start, log_end = math.log(start), math.log(end)
    walk = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, vol, size=steps))])
    t = np.linspace(0.0, 1.0, steps + 1)
    pinned = walk - t * walk[-1]  # zero at both ends
    logs = log_start + t * (log_end - log_start) + pinned
    prices = np.exp(logs)
    prices[0], prices[-1] = start, end
    return prices


def build_rows() -> list[tuple[str, str, str]]:
    train_days = weekdays(*TRAIN)
    future_days = weekdays(*FUTURE)
    rng = np.random.Generator(np.random.PCG64(SEED))
    columns: dict[str, np.ndarray] = {}
    for ticker in ANCHORS:  # fixed iteration order keeps draws reproducible
        a0, a1, a2, a3 = ANCHORS[ticker]
        vol = VOLS[ticker]
        train = bridge(rng, a0, a1, len(train_days) - 1, vol)
        future = bridge(rng, a2, a3, len(future_days) - 1, vol)
        columns[ticker] = np.concatenate([train, future])
    all_days = train_days + future_days
    rows = []
    for i, day in enumerate(all_days):
        for ticker in ANCHORS:
            rows.append((day.isoformat(), ticker, f"{columns[ticker][i]:.6f}"))
    return rows


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "prices.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "ticker", "adj_close"])
        writer.writerows(build_rows())
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
