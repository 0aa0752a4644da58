#!/usr/bin/env python3
"""
NLTU CAPACITY CLI
=================

    python cli.py figure1 --out reports
    python cli.py figure2 --n 3..5 --workers 8 --out reports
    python cli.py figure3 --n 1..5 --out reports
    python cli.py enumerate --model nltu --n 3 --budget 1 --witnesses
    python cli.py oracle --n 1..5
    python cli.py plot --csv reports/figure3.csv --kind figure3

Exit status: 0 on success, 1 when a pipeline fails or a figure1 check
does not pass, 2 on usage errors.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

import config
from concurrency_manager import ConcurrencyManager
from experiments import (CSV_HEADER, Match, run_figure2, run_figure3, verify_figure1,
                         write_report_csv, write_report_json)
from oracle import ORACLE_WEIGHT_BOUND, OracleCacheError, oracle_records
from search import (SearchLimitExceeded, CapacityNotReached, ModelKind, SearchSpec,
                    dump_witnesses, enumerate_functions)
from truthtable import ContractViolation, MAX_ARITY, full_mask

logger = logging.getLogger(__name__)

# LTU black squares, nLTU red points
SERIES_STYLE = {
    "ltu": {"color": "black", "marker": "s", "label": "LTU"},
    "nltu": {"color": "red", "marker": "o", "label": "nLTU"},
}
AXIS_LABELS = {
    "figure2": ("Number of inputs", "Synapses per input to reach maximal LTU capacity"),
    "figure3": ("Number of inputs", "Capacity (log2 of computable functions)"),
}


class ReportFormatError(ValueError):
    """A report CSV does not follow the experiments schema."""


class ChecksFailed(RuntimeError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n_range: List[int] = field(default_factory=list)
    model: Optional[str] = None
    budget: int = 1
    d_max: Optional[int] = None
    workers: int = 1
    state_cap: int = config.DEFAULT_STATE_CAP
    budget_cap: int = config.DEFAULT_BUDGET_CAP
    output_dir: Path = Path("reports")
    witness_flag: bool = False
    cache_dir: Optional[Path] = None
    allow_n6: bool = False
    bound: Optional[int] = None
    csv_path: Optional[Path] = None
    kind: Optional[str] = None
    svg_path: Optional[Path] = None
    log_level: int = logging.INFO


def parse_arity_range(text: str) -> List[int]:
    """'5' or '1..5' to a list of arities, each within 1..6."""
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
        else:
            low = high = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    if low > high:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    if low < 1 or high > MAX_ARITY:
        raise argparse.ArgumentTypeError(f"arity must be within 1..{MAX_ARITY}, got {text!r}")
    return list(range(low, high + 1))


def _positive_int(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--workers', type=_positive_int, default=None,
                        help=f'Worker processes (default: ${config.WORKERS_ENV} or CPU count)')
    common.add_argument('--state-cap', type=_positive_int, default=config.DEFAULT_STATE_CAP,
                        help='Abort a search after this many parameter states')
    common.add_argument('--out', type=Path, default=Path("reports"), help='Output directory')
    common.add_argument('--cache', type=Path, default=None,
                        help=f'Oracle cache directory (default: ${config.CACHE_DIR_ENV} or '
                             f'{config.DEFAULT_CACHE_DIR})')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Debug logging')
    verbosity.add_argument('--quiet', action='store_true', help='Warnings and errors only')

    def arity_options(p: argparse.ArgumentParser, default: Optional[str]) -> None:
        p.add_argument('--n', '--n-range', dest='n_range', type=parse_arity_range,
                       default=parse_arity_range(default) if default else None,
                       required=default is None, help='Arity N or range A..B')
        p.add_argument('--allow-n6', action='store_true', help='Permit the expensive 6-input runs')

    parser = argparse.ArgumentParser(description="Exhaustive capacity of LTU and nLTU neuron models")
    subparsers = parser.add_subparsers(dest='command', required=True, help='Available commands')

    enum_parser = subparsers.add_parser('enumerate', parents=[common],
                                        help='Enumerate the functions of one parameter range')
    arity_options(enum_parser, None)
    enum_parser.add_argument('--model', choices=[m.value for m in ModelKind], required=True)
    enum_parser.add_argument('--budget', type=_positive_int, default=1, help='Synapses per input')
    enum_parser.add_argument('--d-max', type=_positive_int, default=None, help='nLTU subunits')
    enum_parser.add_argument('--witnesses', action='store_true',
                             help='Dump one parameter set per function as JSON-lines')

    oracle_parser = subparsers.add_parser('oracle', parents=[common],
                                          help='Certify the positive threshold functions')
    arity_options(oracle_parser, "1..5")
    oracle_parser.add_argument('--bound', type=_positive_int, default=None,
                               help='Largest integer weight tried by the oracle')

    subparsers.add_parser('figure1', parents=[common], help='Check the three-input example')

    fig2_parser = subparsers.add_parser('figure2', parents=[common],
                                        help='Minimal budget reaching full LTU capacity')
    arity_options(fig2_parser, "3..5")
    fig2_parser.add_argument('--d-max', type=_positive_int, default=None)
    fig2_parser.add_argument('--budget-cap', type=_positive_int, default=config.DEFAULT_BUDGET_CAP)

    fig3_parser = subparsers.add_parser('figure3', parents=[common],
                                        help='Function counts with one synapse per input')
    arity_options(fig3_parser, "1..5")
    fig3_parser.add_argument('--d-max', type=_positive_int, default=None)

    plot_parser = subparsers.add_parser('plot', parents=[common], help='SVG chart from a report CSV')
    plot_parser.add_argument('--csv', type=Path, required=True, dest='csv_path')
    plot_parser.add_argument('--kind', choices=sorted(AXIS_LABELS), required=True)
    plot_parser.add_argument('--svg', type=Path, default=None, dest='svg_path',
                             help='Output file (default: CSV path with .svg suffix)')
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Validated RunConfig; exits with status 2 on usage errors."""
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    n_range = getattr(args, 'n_range', None) or []

    if command == 'enumerate':
        if len(n_range) != 1:
            parser.error("enumerate takes a single arity, not a range")
        if args.model == ModelKind.LTU.value and args.d_max is not None:
            parser.error("--d-max only applies to --model nltu")
    if command in ('oracle', 'figure2') and MAX_ARITY in n_range and not args.allow_n6:
        parser.error(f"arity {MAX_ARITY} is very expensive for {command}; add --allow-n6")

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else None
    if level is None:
        level = logging.DEBUG if os.environ.get(config.DEBUG_ENV) else logging.INFO
    return RunConfig(
        subcommand=command,
        n_range=n_range,
        model=getattr(args, 'model', None),
        budget=getattr(args, 'budget', 1),
        d_max=getattr(args, 'd_max', None),
        workers=args.workers or config.default_workers(),
        state_cap=args.state_cap,
        budget_cap=getattr(args, 'budget_cap', config.DEFAULT_BUDGET_CAP),
        output_dir=args.out,
        witness_flag=getattr(args, 'witnesses', False),
        cache_dir=config.cache_dir(str(args.cache) if args.cache else None),
        allow_n6=getattr(args, 'allow_n6', False),
        bound=getattr(args, 'bound', None),
        csv_path=getattr(args, 'csv_path', None),
        kind=getattr(args, 'kind', None),
        svg_path=getattr(args, 'svg_path', None),
        log_level=level,
    )


# === CHARTS ===

def read_report_csv(csv_path: Path) -> List[Dict[str, str]]:
    """Rows of a report CSV, each column checked against the schema."""
    with open(csv_path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ReportFormatError(f"{csv_path}: row 1: header must be {','.join(CSV_HEADER)}")
        rows = []
        for line_no, values in enumerate(reader, start=2):
            if len(values) != len(CSV_HEADER):
                raise ReportFormatError(
                    f"{csv_path}: row {line_no}: expected {len(CSV_HEADER)} columns, got {len(values)}")
            row = dict(zip(CSV_HEADER, values))
            _check_row(csv_path, line_no, row)
            rows.append(row)
    if not rows:
        raise ReportFormatError(f"{csv_path}: no data rows")
    return rows


def _check_row(csv_path: Path, line_no: int, row: Dict[str, str]) -> None:
    def fail(column: str) -> ReportFormatError:
        return ReportFormatError(f"{csv_path}: row {line_no}, column {column}: bad value {row[column]!r}")

    for column in ("n", "budget", "function_count"):
        if not row[column].isdigit():
            raise fail(column)
    if not 1 <= int(row["n"]) <= MAX_ARITY:
        raise fail("n")
    for column in ("oracle_count", "paper_value"):
        if row[column] and not row[column].isdigit():
            raise fail(column)
    try:
        float(row["capacity_bits"])
    except ValueError:
        raise fail("capacity_bits") from None
    if row["model"] not in SERIES_STYLE:
        raise fail("model")
    if row["match"] not in {m.value for m in Match}:
        raise fail("match")


def emit_plot(csv_path: Path, kind: str, svg_path: Optional[Path] = None) -> Path:
    """One series per model; figure2 draws not-reached budgets as open markers."""
    if kind not in AXIS_LABELS:
        raise ContractViolation(f"unknown chart kind {kind!r}")
    rows = read_report_csv(Path(csv_path))
    svg_path = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
    column = "budget" if kind == "figure2" else "capacity_bits"

    fig, ax = plt.subplots(figsize=(5, 4))
    for model, style in SERIES_STYLE.items():
        series = sorted((int(r["n"]), float(r[column]), r["match"] == Match.NOT_REACHED.value)
                        for r in rows if r["model"] == model)
        if not series:
            continue
        xs = [n for n, _, _ in series]
        ys = [y for _, y, _ in series]
        ax.plot(xs, ys, color=style["color"], linestyle='-', linewidth=1, label=style["label"])
        reached = [(x, y) for x, y, missing in series if not missing]
        missing = [(x, y) for x, y, missing in series if missing]
        if reached:
            ax.plot(*zip(*reached), linestyle='none', marker=style["marker"], color=style["color"])
        if missing:
            ax.plot(*zip(*missing), linestyle='none', marker=style["marker"],
                    markerfacecolor='none', markeredgecolor=style["color"])
    xlabel, ylabel = AXIS_LABELS[kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.xaxis.get_major_locator().set_params(integer=True)
    ax.legend()
    fig.tight_layout()
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("Chart written to %s", svg_path)
    return svg_path


# === SUBCOMMANDS ===

def _run_enumerate(cfg: RunConfig, manager: ConcurrencyManager) -> List[Path]:
    spec = SearchSpec(cfg.n_range[0], cfg.model, cfg.budget, cfg.d_max, cfg.state_cap,
                      cfg.workers, cfg.witness_flag)
    result = enumerate_functions(spec, manager)
    print(json.dumps({
        "n": spec.arity, "model": spec.model_kind.value, "budget": spec.synapse_budget,
        "d_max": spec.max_subunits, "function_count": len(result.functions),
        "states_visited": result.states_visited, "states_pruned": result.states_pruned,
        "spec_hash": spec.spec_hash(),
    }, sort_keys=True))
    if not cfg.witness_flag:
        return []
    name = f"witnesses_{spec.model_kind.value}_n{spec.arity}_k{spec.synapse_budget}.jsonl"
    return [dump_witnesses(result, cfg.output_dir / name)]


def _run_oracle(cfg: RunConfig, manager: ConcurrencyManager) -> List[Path]:
    for n in cfg.n_range:
        records = oracle_records(n, cfg.bound, cfg.cache_dir, manager=manager)
        separable = [r for r in records if r["separable"]]
        print(json.dumps({
            "n": n, "bound": cfg.bound or ORACLE_WEIGHT_BOUND[n], "monotone": len(records),
            "separable": len(separable),
            "capacity": sum(1 for r in separable if int(r["mask"], 16) != full_mask(n)),
        }, sort_keys=True))
    return []


def _run_figure(cfg: RunConfig, manager: ConcurrencyManager) -> List[Path]:
    out = cfg.output_dir
    if cfg.subcommand == 'figure1':
        report = verify_figure1(cfg.workers, manager)
        path = write_report_json(report, out / "figure1_verify.json")
        if not report["passed"]:
            failed = [c["name"] for c in report["checks"] if not c["passed"]]
            raise ChecksFailed(f"figure1 checks failed: {', '.join(failed)}")
        return [path]
    if cfg.subcommand == 'figure2':
        report = run_figure2(cfg.n_range, cfg.d_max, cfg.workers, cfg.budget_cap, cfg.state_cap,
                             cfg.allow_n6, cfg.cache_dir, manager)
    else:
        report = run_figure3(cfg.n_range, cfg.d_max, cfg.workers, cfg.state_cap,
                             oracle_max_arity=MAX_ARITY if cfg.allow_n6 else MAX_ARITY - 1,
                             oracle_cache=cfg.cache_dir, manager=manager)
    return [write_report_csv(report, out / f"{cfg.subcommand}.csv"),
            write_report_json(report, out / f"{cfg.subcommand}.json")]


def run(cfg: RunConfig) -> List[Path]:
    """Execute one subcommand; returns the files it wrote."""
    if cfg.subcommand == 'plot':
        return [emit_plot(cfg.csv_path, cfg.kind, cfg.svg_path)]
    manager = ConcurrencyManager(cfg.workers)
    if cfg.subcommand == 'enumerate':
        return _run_enumerate(cfg, manager)
    if cfg.subcommand == 'oracle':
        return _run_oracle(cfg, manager)
    return _run_figure(cfg, manager)


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_args(argv)
    config.configure_logging(cfg.log_level)
    try:
        written = run(cfg)
    except ContractViolation as e:
        logger.error("Invalid request: %s", e)
        return 2
    except (SearchLimitExceeded, CapacityNotReached, OracleCacheError,
            ReportFormatError, ChecksFailed, OSError) as e:
        logger.error("%s failed: %s", cfg.subcommand, e)
        return 1
    missing = [p for p in written if not p.exists()]
    if missing:
        logger.error("Declared outputs missing: %s", ", ".join(map(str, missing)))
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
