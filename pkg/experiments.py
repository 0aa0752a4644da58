#!/usr/bin/env python3
"""
CAPACITY EXPERIMENTS
====================

Three pipelines over the search and oracle modules:

- figure1: the AC-or-BC-but-not-AB function, computed by a two-synapse
  LTU and by a one-synapse-per-input nLTU.
- figure2: smallest synapse budget per input at which each model covers
  every positive threshold function of n inputs.
- figure3: how many functions each model computes with one synapse per
  input, and the capacity in bits.

Reference values from the literature ride along as metadata. They are
compared, never asserted: the exhaustive counts are the result.
"""

import csv
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union
import logging

import numpy as np
from scipy.special import comb

from concurrency_manager import ConcurrencyManager
from config import DEFAULT_BUDGET_CAP, DEFAULT_STATE_CAP
from models import EXAMPLE_LTU, EXAMPLE_MASK, EXAMPLE_NLTU, ltu_truth_table, nltu_truth_table
from oracle import oracle_capacity
from search import (CapacityNotReached, ModelKind, SearchSpec, enumerate_functions,
                    estimate_states, minimal_budget_for_capacity)
from truthtable import ContractViolation, FunctionSet, TruthTable, evaluate

logger = logging.getLogger(__name__)

__version__ = "1.0.0"

CSV_HEADER = ["n", "model", "budget", "function_count", "oracle_count",
              "capacity_bits", "paper_value", "match"]

# Published reference values: minimal budget (figure2) and k=1 counts (figure3)
FIGURE2_REFERENCE: Dict[Tuple[str, int], int] = {
    ("ltu", 3): 3, ("ltu", 4): 4, ("ltu", 5): 6,
    ("nltu", 3): 2, ("nltu", 4): 2, ("nltu", 5): 2,
}
FIGURE3_REFERENCE: Dict[Tuple[str, int], int] = {
    ("ltu", 5): 81, ("nltu", 5): 332,
    ("ltu", 6): 128, ("nltu", 6): 1000,
}

MODEL_ORDER = (ModelKind.LTU, ModelKind.NLTU)


class Match(Enum):
    TRUE = "true"
    FALSE = "false"
    NA = "na"
    NOT_REACHED = "not_reached"


@dataclass
class ReportRow:
    arity: int
    model_kind: str
    synapse_budget: int
    function_count: int
    oracle_count: Optional[int]
    capacity_bits: float
    paper_value: Optional[int] = None
    match: Match = Match.NA

    def csv_fields(self) -> List[str]:
        return [str(self.arity), self.model_kind, str(self.synapse_budget),
                str(self.function_count),
                "" if self.oracle_count is None else str(self.oracle_count),
                f"{self.capacity_bits:.2f}",
                "" if self.paper_value is None else str(self.paper_value),
                self.match.value]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["match"] = self.match.value
        return data


@dataclass
class CapacityReport:
    kind: str
    rows: List[ReportRow] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)

    def row(self, n: int, model: Union[ModelKind, str]) -> ReportRow:
        name = model.value if isinstance(model, ModelKind) else model
        for row in self.rows:
            if row.arity == n and row.model_kind == name:
                return row
        raise KeyError((n, name))


def capacity_bits(function_count: int) -> float:
    """log2 of the number of computable functions, two decimals."""
    if function_count < 1:
        raise ContractViolation(f"function count must be >= 1, got {function_count}")
    return round(math.log2(function_count), 2)


def closed_form_ltu_single_synapse(n: int) -> int:
    """0/1 weights, theta >= 1: one 'at least theta of S' function per
    nonempty support S and theta in 1..|S|, plus constant FALSE."""
    return int(sum(comb(n, m, exact=True) * m for m in range(n + 1))) + 1


def _match(reference: Optional[int], value: int) -> Match:
    if reference is None:
        return Match.NA
    return Match.TRUE if reference == value else Match.FALSE


def _provenance(workers: int, spec_hashes: Dict[str, str]) -> Dict[str, Any]:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "code_version": __version__,
        "workers": workers,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "spec_hashes": spec_hashes,
    }


def _spec_label(spec: SearchSpec) -> str:
    return f"{spec.model_kind.value}-n{spec.arity}-k{spec.synapse_budget}-d{spec.max_subunits}"


def _check_range(n_range: Iterable[int], low: int, allow_n6: bool) -> List[int]:
    arities = sorted(set(n_range))
    if not arities:
        raise ContractViolation("empty arity range")
    for n in arities:
        if not low <= n <= 6:
            raise ContractViolation(f"arity {n} outside {low}..6")
    if 6 in arities and not allow_n6:
        raise ContractViolation("arity 6 is opt-in; pass allow_n6")
    return arities


def run_figure3(n_range: Iterable[int], d_max: Optional[int] = None, workers: int = 1,
                state_cap: int = DEFAULT_STATE_CAP, oracle_max_arity: int = 5,
                oracle_cache: Optional[Union[str, Path]] = None,
                manager: Optional[ConcurrencyManager] = None) -> CapacityReport:
    """Function counts of both models at one synapse per input.

    Oracle counts are attached up to `oracle_max_arity` (0 disables them).
    """
    arities = _check_range(n_range, 1, allow_n6=True)
    manager = manager or ConcurrencyManager(workers)
    report = CapacityReport(kind="figure3")
    hashes: Dict[str, str] = {}
    closed_form_ok = True
    ordering_ok = True
    for n in arities:
        target = oracle_capacity(n, cache_dir=oracle_cache, manager=manager) if n <= oracle_max_arity else None
        found: Dict[ModelKind, FunctionSet] = {}
        for model in MODEL_ORDER:
            spec = SearchSpec(n, model, 1, d_max if model is ModelKind.NLTU else None,
                              state_cap, workers)
            result = enumerate_functions(spec, manager)
            hashes[_spec_label(spec)] = spec.spec_hash()
            found[model] = result.functions
            count = len(result.functions)
            reference = FIGURE3_REFERENCE.get((model.value, n))
            report.rows.append(ReportRow(n, model.value, 1, count,
                                         None if target is None else len(target),
                                         capacity_bits(count), reference, _match(reference, count)))
        ltu, nltu = found[ModelKind.LTU], found[ModelKind.NLTU]
        closed_form = closed_form_ltu_single_synapse(n)
        closed_form_ok &= closed_form == len(ltu)
        ordering_ok &= ltu.issubset(nltu)
        extras = {
            "closed_form_ltu": closed_form,
            "closed_form_agrees": closed_form == len(ltu),
            "nltu_only": len(nltu.difference(ltu)),
            "ratio": round(len(nltu) / len(ltu), 3),
        }
        if target is not None:
            extras["nltu_beyond_threshold"] = len(nltu.difference(target))
        report.extras[str(n)] = extras
        if closed_form != len(ltu):
            logger.error("n=%d: enumerated %d LTU functions, closed form gives %d",
                         n, len(ltu), closed_form)
    report.checks = {"closed_form_agrees": closed_form_ok, "ltu_within_nltu": ordering_ok}
    report.provenance = _provenance(manager.max_workers, hashes)
    return report


def run_figure2(n_range: Iterable[int], d_max: Optional[int] = None, workers: int = 1,
                budget_cap: int = DEFAULT_BUDGET_CAP, state_cap: int = DEFAULT_STATE_CAP,
                allow_n6: bool = False, oracle_cache: Optional[Union[str, Path]] = None,
                manager: Optional[ConcurrencyManager] = None) -> CapacityReport:
    """Minimal budget at which each model covers every threshold function."""
    arities = _check_range(n_range, 1, allow_n6)
    manager = manager or ConcurrencyManager(workers)
    report = CapacityReport(kind="figure2")
    hashes: Dict[str, str] = {}
    if 6 in arities:
        for model in MODEL_ORDER:
            for k in (1, 2, budget_cap):
                spec = SearchSpec(6, model, k, d_max if model is ModelKind.NLTU else None)
                logger.warning("n=6 %s k=%d: up to %.3g parameter states",
                               model.value, k, float(estimate_states(spec)))
    for n in arities:
        target = oracle_capacity(n, cache_dir=oracle_cache, manager=manager)
        for model in MODEL_ORDER:
            reference = FIGURE2_REFERENCE.get((model.value, n))
            try:
                k, result = minimal_budget_for_capacity(model, n, target, d_max, budget_cap,
                                                        workers, state_cap, manager)
            except CapacityNotReached as e:
                logger.warning("%s", e)
                row = ReportRow(n, model.value, e.best_budget, e.best_count, len(target),
                                capacity_bits(e.best_count), reference, Match.NOT_REACHED)
                hashes[_spec_label(e.best_result.spec)] = e.best_result.spec.spec_hash()
            else:
                count = len(result.functions)
                row = ReportRow(n, model.value, k, count, len(target), capacity_bits(count),
                                reference, _match(reference, k))
                hashes[_spec_label(result.spec)] = result.spec.spec_hash()
            report.rows.append(row)
    report.checks = {
        "nltu_budget_not_above_ltu": all(
            report.row(n, ModelKind.NLTU).synapse_budget <= report.row(n, ModelKind.LTU).synapse_budget
            for n in arities
            if report.row(n, ModelKind.LTU).match is not Match.NOT_REACHED),
    }
    report.provenance = _provenance(manager.max_workers, hashes)
    return report


def verify_figure1(workers: int = 1, manager: Optional[ConcurrencyManager] = None) -> Dict[str, Any]:
    """Named checks for the three-input example; `passed` is their conjunction."""
    manager = manager or ConcurrencyManager(workers)
    checks: List[Dict[str, Any]] = []

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})
        if not passed:
            logger.error("check %s failed: %s", name, detail)

    ltu_tt = ltu_truth_table(EXAMPLE_LTU)
    nltu_tt = nltu_truth_table(EXAMPLE_NLTU)
    target = TruthTable(3, EXAMPLE_MASK)
    check("ltu_mask", ltu_tt == target, f"LTU w=(1,1,2) theta=3 gives {ltu_tt.to_hex()}")
    check("nltu_mask", nltu_tt == target, f"two-subunit nLTU gives {nltu_tt.to_hex()}")
    check("ab_silent", evaluate(target, (1, 1, 0)) == 0, "A and B together do not fire")
    check("ac_bc_fire", evaluate(target, (1, 0, 1)) == 1 and evaluate(target, (0, 1, 1)) == 1,
          "A with C and B with C fire")

    nltu_k1 = enumerate_functions(SearchSpec(3, ModelKind.NLTU, 1, workers=workers, witnesses=True),
                                  manager)
    ltu_k1 = enumerate_functions(SearchSpec(3, ModelKind.LTU, 1, workers=workers), manager)
    ltu_k2 = enumerate_functions(SearchSpec(3, ModelKind.LTU, 2, workers=workers), manager)
    check("nltu_single_synapse", EXAMPLE_MASK in nltu_k1.functions,
          f"{len(nltu_k1.functions)} nLTU functions at k=1")
    check("ltu_single_synapse_fails", EXAMPLE_MASK not in ltu_k1.functions,
          f"{len(ltu_k1.functions)} LTU functions at k=1")
    check("ltu_two_synapses", EXAMPLE_MASK in ltu_k2.functions,
          f"{len(ltu_k2.functions)} LTU functions at k=2")

    witness = (nltu_k1.witnesses or {}).get(EXAMPLE_MASK)
    return {
        "mask": hex(EXAMPLE_MASK),
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "nltu_witness": witness.to_dict() if witness is not None else None,
        "provenance": _provenance(manager.max_workers, {
            _spec_label(r.spec): r.spec.spec_hash() for r in (nltu_k1, ltu_k1, ltu_k2)}),
    }


# === WRITERS ===

def write_report_csv(report: CapacityReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for row in report.rows:
            writer.writerow(row.csv_fields())
    logger.info("Wrote %d rows to %s", len(report.rows), path)
    return path


def write_report_json(report: Union[CapacityReport, Dict[str, Any]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(report, CapacityReport):
        payload = {"kind": report.kind, "rows": [r.to_dict() for r in report.rows],
                   "extras": report.extras, "checks": report.checks,
                   "provenance": report.provenance}
    else:
        payload = report
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info("Wrote %s", path)
    return path
