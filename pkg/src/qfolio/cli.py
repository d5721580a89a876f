"""Command-line front-end: manifest-driven, reproducible experiments.

Exit codes: 0 success, 2 configuration error (bad manifest or parameters),
3 data error (missing or malformed inputs), 4 internal error.

An experiment manifest is one JSON document; `--dump-config` prints the
fully resolved form (alpha evaluated, seed offset folded in), which
re-ingests to an equivalent experiment regardless of the environment.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from qfolio import ansatz
from qfolio.backtest import Portfolio, backtest, feasibility_summary
from qfolio.engine import OptimizerConfig, run_experiment_grid
from qfolio.errors import (
    BudgetOutOfRange,
    EmptyWindow,
    MalformedRow,
    MissingArtifact,
    MissingReturn,
    MissingTicker,
    NoCommonDates,
    NonPositivePenalty,
    QfolioError,
    SingleObservation,
    TooLarge,
)
from qfolio.market_data import (
    DateWindow,
    compute_snapshot,
    load_prices,
    period_return,
    restrict_to_window,
)
from qfolio.oracle import OracleResult, solve_exact
from qfolio.qubo import build_qubo

SEED_OFFSET_ENV = "QFOLIO_SEED_OFFSET"


class ManifestError(QfolioError):
    """Manifest missing, unreadable, or failing validation."""


_CONFIG_ERRORS = (ManifestError, BudgetOutOfRange, NonPositivePenalty, TooLarge)
_DATA_ERRORS = (
    MissingArtifact,
    MissingTicker,
    MalformedRow,
    EmptyWindow,
    NoCommonDates,
    SingleObservation,
    MissingReturn,
    FileNotFoundError,
)


@dataclass(frozen=True)
class ExperimentManifest:
    experiment: str
    prices_csv: str
    universe: tuple[str, ...]
    data_window: DateWindow
    future_window: DateWindow
    q: float
    alpha: float
    budget: int
    families: tuple[str, ...]
    depths: tuple[int, ...]
    seeds: tuple[int, ...]
    shots: int
    optimizer: OptimizerConfig
    out_dir: str
    seed_offset: int

    @property
    def n(self) -> int:
        return len(self.universe)

    def effective_seeds(self) -> tuple[int, ...]:
        return tuple(s + self.seed_offset for s in self.seeds)

    def run_root(self) -> str:
        return os.path.join(self.out_dir, self.experiment)

    def resolved_doc(self) -> dict:
        # Seeds folded and offset pinned to 0 so the dump round-trips
        # identically under any QFOLIO_SEED_OFFSET.
        return {
            "experiment": self.experiment,
            "prices_csv": self.prices_csv,
            "universe": list(self.universe),
            "data_window": {
                "start": self.data_window.start.isoformat(),
                "end": self.data_window.end.isoformat(),
            },
            "future_window": {
                "start": self.future_window.start.isoformat(),
                "end": self.future_window.end.isoformat(),
            },
            "q": self.q,
            "alpha": self.alpha,
            "budget": self.budget,
            "families": list(self.families),
            "depths": list(self.depths),
            "seeds": list(self.effective_seeds()),
            "seed_offset": 0,
            "shots": self.shots,
            "optimizer": {
                "method": self.optimizer.method,
                "max_evaluations": self.optimizer.max_evaluations,
                "initial_spread": self.optimizer.initial_spread,
                "cost_mode": self.optimizer.cost_mode,
            },
            "out_dir": self.out_dir,
        }


def _window_from_doc(doc, label: str) -> DateWindow:
    try:
        return DateWindow.parse(doc["start"], doc["end"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"bad {label}: {exc}") from exc


def _resolve_alpha(raw, n: int) -> float:
    if isinstance(raw, str):
        if raw.replace(" ", "") != "n/2":
            raise ManifestError(f'alpha rule must be a number or "n/2", got {raw!r}')
        return n / 2.0
    if isinstance(raw, (int, float)):
        return float(raw)
    raise ManifestError(f"alpha must be a number or \"n/2\", got {raw!r}")


def load_manifest(path: str | Path) -> ExperimentManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")

    missing = [
        k
        for k in ("experiment", "prices_csv", "universe", "data_window", "future_window", "budget")
        if k not in doc
    ]
    if missing:
        raise ManifestError(f"manifest missing keys: {missing}")

    universe = tuple(doc["universe"])
    if not universe or len(set(universe)) != len(universe):
        raise ManifestError("universe must be a non-empty list of distinct tickers")

    families = tuple(doc.get("families", list(ansatz.FAMILIES)))
    unknown = [f for f in families if f not in ansatz.FAMILIES]
    if not families or unknown:
        raise ManifestError(f"families must be non-empty and drawn from {ansatz.FAMILIES}")
    depths = tuple(int(d) for d in doc.get("depths", [2, 4, 6, 8, 10]))
    if not depths or any(d < 1 for d in depths):
        raise ManifestError("depths must be a non-empty list of integers >= 1")
    seeds = tuple(int(s) for s in doc.get("seeds", [0, 1, 2, 3, 4]))
    if not seeds:
        raise ManifestError("seeds must be a non-empty list of integers")

    shots = int(doc.get("shots", 1024))
    if shots < 1:
        raise ManifestError("shots must be >= 1")
    opt_doc = doc.get("optimizer", {})
    if not isinstance(opt_doc, dict):
        raise ManifestError("optimizer must be an object")
    try:
        optimizer = OptimizerConfig(
            method=opt_doc.get("method", "nelder_mead"),
            max_evaluations=int(opt_doc.get("max_evaluations", 500)),
            initial_spread=float(opt_doc.get("initial_spread", 2.0 * math.pi)),
            seed=0,
            cost_mode=opt_doc.get("cost_mode", "exact"),
            shots=shots,
        )
    except QfolioError as exc:
        raise ManifestError(str(exc)) from exc

    if "seed_offset" in doc:
        seed_offset = int(doc["seed_offset"])
    else:
        seed_offset = int(os.environ.get(SEED_OFFSET_ENV, "0") or "0")

    prices_csv = doc["prices_csv"]
    if not os.path.isabs(prices_csv):
        prices_csv = str((path.parent / prices_csv).resolve())

    budget = int(doc["budget"])
    if not 1 <= budget <= len(universe):
        raise BudgetOutOfRange(f"budget {budget} outside 1..{len(universe)}")

    q = float(doc.get("q", 0.5))
    alpha = _resolve_alpha(doc.get("alpha", "n/2"), len(universe))
    if alpha <= 0:
        raise NonPositivePenalty(f"alpha must be positive, got {alpha}")

    return ExperimentManifest(
        experiment=str(doc["experiment"]),
        prices_csv=prices_csv,
        universe=universe,
        data_window=_window_from_doc(doc["data_window"], "data_window"),
        future_window=_window_from_doc(doc["future_window"], "future_window"),
        q=q,
        alpha=alpha,
        budget=budget,
        families=families,
        depths=depths,
        seeds=seeds,
        shots=shots,
        optimizer=optimizer,
        out_dir=str(doc.get("out_dir", "out")),
        seed_offset=seed_offset,
    )


def _sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_snapshot(manifest: ExperimentManifest):
    series = load_prices(manifest.prices_csv, list(manifest.universe), manifest.data_window)
    return series, compute_snapshot(series)


def _write_json(path: str, doc_text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doc_text)
        fh.write("\n")


def _apply_overrides(manifest: ExperimentManifest, args) -> ExperimentManifest:
    optimizer = manifest.optimizer
    shots = manifest.shots
    if getattr(args, "shots", None) is not None:
        shots = args.shots
        optimizer = replace(optimizer, shots=shots)
    if getattr(args, "cost_mode", None) is not None:
        optimizer = replace(optimizer, cost_mode=args.cost_mode)
    out_dir = getattr(args, "out", None) or manifest.out_dir
    return replace(manifest, optimizer=optimizer, shots=shots, out_dir=out_dir)


def cmd_optimize(args) -> int:
    manifest = _apply_overrides(load_manifest(args.manifest), args)
    if args.dump_config:
        print(json.dumps(manifest.resolved_doc(), indent=2, sort_keys=True))
        return 0
    _, snapshot = _load_snapshot(manifest)
    root = manifest.run_root()
    results = run_experiment_grid(
        snapshot,
        q=manifest.q,
        alpha=manifest.alpha,
        budget=manifest.budget,
        families=list(manifest.families),
        depths=list(manifest.depths),
        seeds=list(manifest.effective_seeds()),
        config=manifest.optimizer,
        out_dir=root,
        jobs=args.jobs,
    )
    run_doc = dict(manifest.resolved_doc())
    run_doc["schema"] = "qfolio.run_manifest.v1"
    run_doc["prices_sha256"] = _sha256_file(manifest.prices_csv)
    _write_json(os.path.join(root, "run_manifest.json"), json.dumps(run_doc, sort_keys=True))
    if manifest.n <= 24:
        problem = build_qubo(
            snapshot, q=manifest.q, alpha=manifest.alpha, budget=manifest.budget
        )
        _write_json(os.path.join(root, "oracle.json"), solve_exact(problem).to_json())
    matched = sum(
        1
        for r in results
        if r.ground_truth is not None and r.best_sampled_cost() <= r.ground_truth[1] + 1e-9
    )
    print(f"wrote {len(results)} runs to {root}")
    if results and results[0].ground_truth is not None:
        print(f"{matched}/{len(results)} runs sampled the exact optimum")
    return 0


def cmd_oracle(args) -> int:
    manifest = _apply_overrides(load_manifest(args.manifest), args)
    _, snapshot = _load_snapshot(manifest)
    problem = build_qubo(snapshot, q=manifest.q, alpha=manifest.alpha, budget=manifest.budget)
    result = solve_exact(problem)
    print(result.to_json())
    _write_json(os.path.join(manifest.run_root(), "oracle.json"), result.to_json())
    return 0


def _read_run_dir(run_dir: str):
    manifest_path = os.path.join(run_dir, "run_manifest.json")
    if not os.path.exists(manifest_path):
        raise MissingArtifact(f"run directory {run_dir} has no run_manifest.json")
    with open(manifest_path, encoding="utf-8") as fh:
        run_doc = json.load(fh)
    docs = []
    for family in run_doc["families"]:
        for depth in run_doc["depths"]:
            for seed in run_doc["seeds"]:
                path = os.path.join(run_dir, family, str(depth), str(seed), "result.json")
                if not os.path.exists(path):
                    raise MissingArtifact(f"missing result {path}")
                with open(path, encoding="utf-8") as fh:
                    docs.append(json.load(fh))
    if not docs:
        raise MissingArtifact(f"run directory {run_dir} holds no results")
    return run_doc, docs


@dataclass(frozen=True)
class _RunView:
    """Just enough of a RunResult, rehydrated from result.json."""

    metadata: "_MetaView"
    top_bitstrings: tuple[tuple[str, float, float], ...]


@dataclass(frozen=True)
class _MetaView:
    family: str
    depth: int
    seed: int


def _views(docs) -> list[_RunView]:
    views = []
    for doc in docs:
        meta = doc["metadata"]
        tops = tuple(
            (e["bitstring"], e["probability"], e["cost"]) for e in doc["top_bitstrings"]
        )
        views.append(
            _RunView(
                metadata=_MetaView(meta["family"], meta["depth"], meta["seed"]),
                top_bitstrings=tops,
            )
        )
    return views


def _backtest_artifacts(args):
    run_dir = args.run_dir
    run_doc, docs = _read_run_dir(run_dir)
    universe = tuple(run_doc["universe"])
    future = _window_from_doc(run_doc["future_window"], "future_window")
    data_window = _window_from_doc(run_doc["data_window"], "data_window")
    prices_csv = run_doc["prices_csv"]

    views = _views(docs)
    portfolios = []
    seen: dict[str, int] = {}
    for view in views:
        bits = view.top_bitstrings[0][0]
        seen[bits] = seen.get(bits, 0) + 1
    for bits, count in sorted(seen.items()):
        portfolios.append(
            Portfolio.from_bitstring(bits, universe, source=f"algorithm x{count}")
        )
    for manual in getattr(args, "manual", None) or []:
        tickers = [t.strip() for t in manual.split(",") if t.strip()]
        portfolios.append(Portfolio.from_tickers(tickers, universe, source="manual"))

    future_series = load_prices(prices_csv, list(universe), future)
    report = backtest(portfolios, future_series, future)

    trailing = {}
    for series in load_prices(prices_csv, list(universe), data_window):
        trailing[series.ticker] = period_return(restrict_to_window(series, data_window))

    oracle_path = os.path.join(run_dir, "oracle.json")
    if os.path.exists(oracle_path):
        with open(oracle_path, encoding="utf-8") as fh:
            oracle = OracleResult.from_json(fh.read())
    else:
        series = load_prices(prices_csv, list(universe), data_window)
        problem = build_qubo(
            compute_snapshot(series),
            q=float(run_doc["q"]),
            alpha=float(run_doc["alpha"]),
            budget=int(run_doc["budget"]),
        )
        oracle = solve_exact(problem)

    text, doc = feasibility_summary(
        report, oracle, views, universe=universe, trailing_returns=trailing
    )
    return report, text, doc


def cmd_backtest(args) -> int:
    report, feas_text, feas_doc = _backtest_artifacts(args)
    out_dir = args.out or args.run_dir
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "backtest.json"), report.to_json())
    with open(os.path.join(out_dir, "backtest.md"), "w", encoding="utf-8") as fh:
        fh.write(report.to_markdown())
    _write_json(os.path.join(out_dir, "feasibility.json"), json.dumps(feas_doc, sort_keys=True))
    with open(os.path.join(out_dir, "feasibility.md"), "w", encoding="utf-8") as fh:
        fh.write(feas_text)
    print(f"wrote backtest and feasibility reports to {out_dir}")
    return 0


def cmd_report(args) -> int:
    run_doc, docs = _read_run_dir(args.run_dir)
    report, feas_text, _ = _backtest_artifacts(args)
    lines = [
        f"# Experiment {run_doc['experiment']}",
        "",
        f"- universe: {', '.join(run_doc['universe'])}",
        f"- q={run_doc['q']}, alpha={run_doc['alpha']}, budget={run_doc['budget']}",
        f"- grid: {len(run_doc['families'])} families x {len(run_doc['depths'])} depths "
        f"x {len(run_doc['seeds'])} seeds = {len(docs)} runs",
        "",
        "## Best sampled cost per family",
        "",
        "| Family | Best cost | Ground truth |",
        "| --- | ---: | ---: |",
    ]
    best: dict[str, float] = {}
    truth = None
    for doc in docs:
        fam = doc["metadata"]["family"]
        cost = min(e["cost"] for e in doc["top_bitstrings"])
        best[fam] = min(best.get(fam, float("inf")), cost)
        if doc["ground_truth"] is not None:
            truth = doc["ground_truth"]["cost"]
    for fam in run_doc["families"]:
        shown = "-" if truth is None else f"{truth:.6f}"
        lines.append(f"| {fam} | {best[fam]:.6f} | {shown} |")
    lines += ["", report.to_markdown(), feas_text]
    text = "\n".join(lines)
    out_dir = args.out or args.run_dir
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.md"), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote report.md to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfolio", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="run the variational grid from a manifest")
    opt.add_argument("--manifest", required=True)
    opt.add_argument("--jobs", type=int, default=1)
    opt.add_argument("--cost-mode", choices=["exact", "sampled"], dest="cost_mode")
    opt.add_argument("--shots", type=int)
    opt.add_argument("--out", help="override the manifest output directory")
    opt.add_argument(
        "--dump-config", action="store_true", help="print the resolved manifest and exit"
    )
    opt.set_defaults(func=cmd_optimize)

    orc = sub.add_parser("oracle", help="exact brute-force solve of the manifest QUBO")
    orc.add_argument("--manifest", required=True)
    orc.add_argument("--out", help="override the manifest output directory")
    orc.set_defaults(func=cmd_oracle)

    bt = sub.add_parser("backtest", help="score selected portfolios on the future window")
    bt.add_argument("--run-dir", required=True, dest="run_dir")
    bt.add_argument(
        "--manual",
        action="append",
        help="extra comma-separated ticker set to evaluate; repeatable",
    )
    bt.add_argument("--out", help="directory for report files (default: run dir)")
    bt.set_defaults(func=cmd_backtest)

    rep = sub.add_parser("report", help="consolidated Markdown report for a run directory")
    rep.add_argument("--run-dir", required=True, dest="run_dir")
    rep.add_argument("--manual", action="append", help=argparse.SUPPRESS)
    rep.add_argument("--out", help="directory for report.md (default: run dir)")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except QfolioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # noqa: BLE001 - last-resort exit code mapping
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
