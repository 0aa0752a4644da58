#!/usr/bin/env python3
"""
EXHAUSTIVE PARAMETER SEARCH
===========================

Enumerates every truth table an LTU or nLTU computes inside an integer
parameter range:

- LTU: weights w_i in 0..k, theta in 1..sum(w)+1.
- nLTU: d_max subunits (empty ones allowed), each input spreads at most k
  synapses over the subunits, s_j in 1..(row sum of subunit j), theta in
  1..sum(s)+1.

nLTU subunits are interchangeable, so only weight matrices whose rows are
sorted, and saturations sorted inside runs of identical rows, are
evaluated. The orderings skipped that way are counted in states_pruned.

Chunks of the outer weight loop run through ConcurrencyManager; partial
results are merged by set union, so the functions found never depend on
the worker count.
"""

import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union
import logging

import numpy as np
from scipy.special import comb

from concurrency_manager import ConcurrencyManager
from config import DEFAULT_BUDGET_CAP, DEFAULT_STATE_CAP
from models import (LTUParams, NLTUParams, Params, assignment_matrix, level_cuts,
                    level_set_masks, ltu_truth_table, nltu_totals, nltu_truth_table)
from truthtable import ContractViolation, FunctionSet, MAX_ARITY

logger = logging.getLogger(__name__)

NLTU_CHUNK_SIZE = 256       # weight matrices per worker task
PROGRESS_INTERVAL = 5.0     # seconds between progress records


class ModelKind(Enum):
    LTU = "ltu"
    NLTU = "nltu"


class SearchLimitExceeded(RuntimeError):
    """states_visited passed the configured cap; `partial` holds what was found."""

    def __init__(self, message: str, partial: 'SearchResult'):
        super().__init__(message)
        self.partial = partial


class CapacityNotReached(RuntimeError):
    """No budget up to the cap covers the target set."""

    def __init__(self, message: str, best_budget: int, best_count: int,
                 covered: int, best_result: 'SearchResult'):
        super().__init__(message)
        self.best_budget = best_budget
        self.best_count = best_count
        self.covered = covered
        self.best_result = best_result


@dataclass(frozen=True)
class SearchSpec:
    """One parameter range to search exhaustively"""
    arity: int
    model_kind: ModelKind
    synapse_budget: int
    max_subunits: Optional[int] = None
    state_cap: int = DEFAULT_STATE_CAP
    workers: int = 1
    witnesses: bool = False

    def __post_init__(self):
        if not isinstance(self.arity, int) or not 1 <= self.arity <= MAX_ARITY:
            raise ContractViolation(f"arity must be in 1..{MAX_ARITY}, got {self.arity!r}")
        kind = self.model_kind
        if isinstance(kind, str):
            try:
                kind = ModelKind(kind.lower())
            except ValueError:
                raise ContractViolation(f"unknown model kind {self.model_kind!r}") from None
        object.__setattr__(self, "model_kind", kind)
        if not isinstance(self.synapse_budget, int) or self.synapse_budget < 1:
            raise ContractViolation(f"synapse budget must be >= 1, got {self.synapse_budget!r}")
        if kind is ModelKind.LTU:
            object.__setattr__(self, "max_subunits", 1)
        elif self.max_subunits is None:
            object.__setattr__(self, "max_subunits", self.arity)
        elif not isinstance(self.max_subunits, int) or self.max_subunits < 1:
            raise ContractViolation(f"max_subunits must be >= 1, got {self.max_subunits!r}")
        if self.state_cap < 1:
            raise ContractViolation(f"state cap must be >= 1, got {self.state_cap}")
        if self.workers < 1:
            raise ContractViolation(f"workers must be >= 1, got {self.workers}")

    @staticmethod
    def saturation_range(row: Sequence[int]) -> range:
        """s_j in 1..drive; an empty subunit only takes s_j = 1."""
        return range(1, max(sum(row), 1) + 1)

    @staticmethod
    def threshold_range(max_total: int) -> range:
        """theta in 1..max_total+1; anything larger is constant FALSE again."""
        return range(1, max_total + 2)

    def to_dict(self) -> Dict[str, Union[int, str]]:
        return {"n": self.arity, "model": self.model_kind.value,
                "budget": self.synapse_budget, "d_max": self.max_subunits}

    def spec_hash(self) -> str:
        """Identity of the searched range; workers, caps and witnesses excluded."""
        raw = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(raw.encode()).hexdigest()

    def with_budget(self, budget: int) -> 'SearchSpec':
        return SearchSpec(self.arity, self.model_kind, budget,
                          None if self.model_kind is ModelKind.LTU else self.max_subunits,
                          self.state_cap, self.workers, self.witnesses)


@dataclass
class SearchResult:
    spec: SearchSpec
    functions: FunctionSet
    states_visited: int = 0
    states_pruned: int = 0
    witnesses: Optional[Dict[int, Params]] = None
    elapsed: float = 0.0


# === CHUNK WORKERS ===

@dataclass
class _Partial:
    masks: Set[int] = field(default_factory=set)
    visited: int = 0
    pruned: int = 0
    witnesses: Optional[Dict[int, Params]] = None


def _offer(witnesses: Dict[int, Params], mask: int, params: Params) -> None:
    known = witnesses.get(mask)
    if known is None or params.sort_key() < known.sort_key():
        witnesses[mask] = params


def _merge(acc: _Partial, part: _Partial) -> _Partial:
    acc.masks |= part.masks
    acc.visited += part.visited
    acc.pruned += part.pruned
    if part.witnesses is not None:
        if acc.witnesses is None:
            acc.witnesses = {}
        for mask, params in part.witnesses.items():
            _offer(acc.witnesses, mask, params)
    return acc


def _ltu_chunk(task: Tuple[int, int, int, bool]) -> _Partial:
    """Every weight vector whose first weight equals `first`."""
    n, k, first, want_witnesses = task
    rest = list(itertools.product(range(k + 1), repeat=n - 1))
    weights = np.array([(first,) + r for r in rest], dtype=np.int64)
    drives = weights @ assignment_matrix(n).T
    sums = weights.sum(axis=1)
    part = _Partial(visited=int((sums + 1).sum()))
    part.masks = set(level_set_masks(drives).tolist())
    if want_witnesses:
        part.witnesses = {}
        for theta, masks in level_cuts(drives):
            rows = np.flatnonzero(theta <= sums + 1)
            unique, first_rows = np.unique(masks[rows], return_index=True)
            for mask, row in zip(unique.tolist(), rows[first_rows].tolist()):
                _offer(part.witnesses, mask, LTUParams(tuple(weights[row].tolist()), theta))
    return part


def _saturation_batch(matrix: Tuple[Tuple[int, ...], ...]) -> Tuple[np.ndarray, np.ndarray]:
    """Canonical saturation vectors of `matrix` and their ordering counts.

    Inside a run of identical rows the saturations are non-decreasing; the
    second array holds how many ordered (row, saturation) sequences each
    canonical vector stands for.
    """
    d = len(matrix)
    runs = [(row, len(list(group))) for row, group in itertools.groupby(matrix)]
    per_run = []
    for row, size in runs:
        options = []
        for sats in itertools.combinations_with_replacement(SearchSpec.saturation_range(row), size):
            repeats = 1
            for _, same in itertools.groupby(sats):
                repeats *= math.factorial(len(list(same)))
            options.append((sats, repeats))
        per_run.append(options)
    vectors, orderings = [], []
    for choice in itertools.product(*per_run):
        vectors.append(tuple(s for sats, _ in choice for s in sats))
        orderings.append(math.factorial(d) // math.prod(r for _, r in choice))
    return np.array(vectors, dtype=np.int64), np.array(orderings, dtype=np.int64)


def _nltu_chunk(task: Tuple[int, List[Tuple[Tuple[int, ...], ...]], bool]) -> _Partial:
    n, matrices, want_witnesses = task
    part = _Partial(witnesses={} if want_witnesses else None)
    all_totals = []
    for matrix in matrices:
        weights = np.array(matrix, dtype=np.int64)
        saturations, orderings = _saturation_batch(matrix)
        totals = nltu_totals(weights, saturations)
        thetas = saturations.sum(axis=1) + 1
        part.visited += int(thetas.sum())
        part.pruned += int(((orderings - 1) * thetas).sum())
        all_totals.append(totals)
        if want_witnesses:
            for theta, masks in level_cuts(totals):
                rows = np.flatnonzero(theta <= thetas)
                unique, first_rows = np.unique(masks[rows], return_index=True)
                for mask, row in zip(unique.tolist(), rows[first_rows].tolist()):
                    _offer(part.witnesses, mask,
                           NLTUParams(matrix, tuple(saturations[row].tolist()), theta))
    if all_totals:
        totals = np.unique(np.concatenate(all_totals), axis=0)
        part.masks = set(level_set_masks(totals).tolist())
    return part


# === CANONICAL WEIGHT MATRICES ===

def candidate_rows(n: int, k: int) -> List[Tuple[int, ...]]:
    """All subunit rows with entries <= k, lexicographic (empty row first)."""
    return sorted(itertools.product(range(k + 1), repeat=n))


def _extend(prefix: Tuple[Tuple[int, ...], ...], pool: List[Tuple[int, ...]],
            remaining: Tuple[int, ...], d: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    if len(prefix) == d:
        yield prefix
        return
    for pos, row in enumerate(pool):
        left = tuple(b - w for b, w in zip(remaining, row))
        fitting = [r for r in pool[pos:] if all(w <= b for w, b in zip(r, left))]
        yield from _extend(prefix + (row,), fitting, left, d)


def canonical_weight_matrices(n: int, k: int, d: int) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """Sorted d-row matrices whose column sums stay within k."""
    yield from _extend((), candidate_rows(n, k), (k,) * n, d)


def _batched(items: Iterable, size: int) -> Iterator[list]:
    iterator = iter(items)
    while True:
        batch = list(itertools.islice(iterator, size))
        if not batch:
            return
        yield batch


def canonicalize_nltu(p: NLTUParams) -> NLTUParams:
    """Representative of p's subunit-permutation orbit: (row, s) pairs sorted."""
    pairs = sorted(zip(p.subunit_weights, p.saturations))
    return NLTUParams(tuple(row for row, _ in pairs), tuple(s for _, s in pairs), p.threshold)


# === DRIVERS ===

def _tasks(spec: SearchSpec) -> Iterator[tuple]:
    n, k = spec.arity, spec.synapse_budget
    if spec.model_kind is ModelKind.LTU:
        for first in range(k + 1):
            yield (n, k, first, spec.witnesses)
    else:
        matrices = canonical_weight_matrices(n, k, spec.max_subunits)
        for batch in _batched(matrices, NLTU_CHUNK_SIZE):
            yield (n, batch, spec.witnesses)


def _finish(spec: SearchSpec, part: _Partial, elapsed: float) -> SearchResult:
    return SearchResult(spec=spec, functions=FunctionSet.from_masks(spec.arity, part.masks),
                        states_visited=part.visited, states_pruned=part.pruned,
                        witnesses=part.witnesses, elapsed=elapsed)


def enumerate_functions(spec: SearchSpec, manager: Optional[ConcurrencyManager] = None) -> SearchResult:
    """Every distinct truth table computable inside spec's parameter range."""
    manager = manager or ConcurrencyManager(spec.workers)
    worker = _ltu_chunk if spec.model_kind is ModelKind.LTU else _nltu_chunk
    start_time = time.time()
    last_report = [start_time]

    def check(acc: _Partial) -> None:
        if acc.visited > spec.state_cap:
            partial = _finish(spec, acc, time.time() - start_time)
            raise SearchLimitExceeded(
                f"{spec.model_kind.value} n={spec.arity} k={spec.synapse_budget}: "
                f"{acc.visited} states exceed cap {spec.state_cap} "
                f"({len(acc.masks)} functions found so far)", partial)
        now = time.time()
        if now - last_report[0] >= PROGRESS_INTERVAL:
            last_report[0] = now
            logger.info("%s n=%d k=%d: %d states visited, %d pruned, %d functions",
                        spec.model_kind.value, spec.arity, spec.synapse_budget,
                        acc.visited, acc.pruned, len(acc.masks))

    initial = _Partial(witnesses={} if spec.witnesses else None)
    part = manager.map_reduce(worker, _tasks(spec), _merge, initial, on_result=check)
    result = _finish(spec, part, time.time() - start_time)
    logger.info("%s n=%d k=%d d_max=%d: %d functions (%d states visited, %d pruned) in %.2fs",
                spec.model_kind.value, spec.arity, spec.synapse_budget, spec.max_subunits,
                len(result.functions), result.states_visited, result.states_pruned,
                result.elapsed)
    return result


def _input_spreads(d: int, k: int) -> List[Tuple[int, ...]]:
    """Ways one input puts at most k synapses on d ordered subunits."""
    return [c for c in itertools.product(range(k + 1), repeat=d) if sum(c) <= k]


def _check_naive_cap(spec: SearchSpec, functions: FunctionSet, visited: int) -> None:
    if visited > spec.state_cap:
        raise SearchLimitExceeded(f"naive search passed cap {spec.state_cap}",
                                  SearchResult(spec, functions, visited))


def enumerate_naive(spec: SearchSpec) -> SearchResult:
    """Unpruned reference: every ordered parameter tuple, one device at a time."""
    n, k = spec.arity, spec.synapse_budget
    start_time = time.time()
    functions = FunctionSet(n)
    visited = 0
    if spec.model_kind is ModelKind.LTU:
        for weights in itertools.product(range(k + 1), repeat=n):
            for theta in spec.threshold_range(sum(weights)):
                functions.add(ltu_truth_table(LTUParams(weights, theta)))
                visited += 1
            _check_naive_cap(spec, functions, visited)
    else:
        d = spec.max_subunits
        for columns in itertools.product(_input_spreads(d, k), repeat=n):
            rows = tuple(zip(*columns))
            for sats in itertools.product(*(spec.saturation_range(r) for r in rows)):
                for theta in spec.threshold_range(sum(sats)):
                    functions.add(nltu_truth_table(NLTUParams(rows, sats, theta)))
                    visited += 1
            _check_naive_cap(spec, functions, visited)
    return SearchResult(spec=spec, functions=functions, states_visited=visited,
                        elapsed=time.time() - start_time)


def minimal_budget_for_capacity(model_kind: Union[ModelKind, str], n: int, target: FunctionSet,
                                d_max: Optional[int] = None,
                                budget_cap: int = DEFAULT_BUDGET_CAP,
                                workers: int = 1,
                                state_cap: int = DEFAULT_STATE_CAP,
                                manager: Optional[ConcurrencyManager] = None
                                ) -> Tuple[int, SearchResult]:
    """Smallest k whose function set contains every target function.

    For the LTU containment is equality (it computes nothing else); the nLTU
    also computes monotone functions outside the target.
    """
    if target.arity != n:
        raise ContractViolation(f"target has arity {target.arity}, search arity is {n}")
    base = SearchSpec(n, model_kind, 1, d_max, state_cap, workers)
    manager = manager or ConcurrencyManager(workers)
    best: Optional[Tuple[int, int, SearchResult]] = None
    for k in range(1, budget_cap + 1):
        result = enumerate_functions(base.with_budget(k), manager)
        covered = len(target) - len(target.difference(result.functions))
        logger.info("%s n=%d k=%d covers %d/%d target functions",
                    base.model_kind.value, n, k, covered, len(target))
        if covered == len(target):
            return k, result
        if best is None or covered >= best[1]:
            best = (k, covered, result)
    k, covered, result = best
    raise CapacityNotReached(
        f"{base.model_kind.value} n={n}: budget cap {budget_cap} reached, best k={k} "
        f"covers {covered}/{len(target)}", best_budget=k,
        best_count=len(result.functions), covered=covered, best_result=result)


def estimate_states(spec: SearchSpec) -> int:
    """Upper bound on ordered parameter states, for cost warnings."""
    n, k = spec.arity, spec.synapse_budget
    thetas = n * k + 1
    if spec.model_kind is ModelKind.LTU:
        return (k + 1) ** n * thetas
    d = spec.max_subunits
    matrices = int(comb(k + d, d, exact=True)) ** n
    saturations = max(1, math.ceil(n * k / d)) ** d
    return matrices * saturations * thetas


def dump_witnesses(result: SearchResult, path: Union[str, Path]) -> Path:
    """JSON-lines, one {mask, params} record per function, ascending mask."""
    if result.witnesses is None:
        raise ContractViolation("search ran without witnesses")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for mask in result.functions.sorted_masks():
            record = {"mask": hex(mask), "params": result.witnesses[mask].to_dict()}
            f.write(json.dumps(record, sort_keys=True) + '\n')
    logger.info("Wrote %d witnesses to %s", len(result.functions), path)
    return path
