#!/usr/bin/env python3
"""
THRESHOLD ORACLE
================

Ground truth computed without the parameter search:

- every monotone Boolean function of n <= 6 inputs, built bottom-up from
  pairs of (n-1)-input monotone functions f0 <= f1;
- for each one, a self-checking certificate of whether some nonnegative
  integer weights and theta >= 1 realize it.

The capacity target is the set of realizable functions. Constant TRUE is
never in it (with theta >= 1 the all-zero input cannot fire); constant
FALSE always is.

Certificates for an arity are cached as JSON-lines next to a sha256
sidecar. The cache is an optimisation only; deleting it is always safe.
"""

import functools
import hashlib
import itertools
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union
import logging

import numpy as np

import config
from concurrency_manager import ConcurrencyManager
from models import LTUParams, assignment_matrix, level_cuts, ltu_truth_table
from truthtable import (ContractViolation, FunctionSet, TruthTable, MAX_ARITY, full_mask,
                        is_monotone, variable_mask, violating_monotone_pair)

logger = logging.getLogger(__name__)

# Largest per-input weight tried. The known worst cases for n = 1..6 are
# 1, 1, 2, 3, 5, 9; each bound leaves two spare levels.
ORACLE_WEIGHT_BOUND: Dict[int, int] = {1: 3, 2: 3, 3: 4, 4: 5, 5: 7, 6: 11}

CERTIFY_CHUNK = 4096


class OracleCacheError(RuntimeError):
    """A corrupt cache file could not be replaced."""


class Outcome(Enum):
    SEPARABLE = "separable"
    NOT_SEPARABLE = "not-separable"


@dataclass(frozen=True)
class SeparabilityCertificate:
    outcome: Outcome
    weights: Optional[Tuple[int, ...]] = None
    threshold: Optional[int] = None
    violating_pair: Tuple[int, ...] = ()
    reason: str = ""

    @property
    def separable(self) -> bool:
        return self.outcome is Outcome.SEPARABLE

    def to_record(self, mask: int) -> Dict:
        record = {"mask": hex(mask), "separable": self.separable}
        if self.separable:
            record["weights"] = list(self.weights)
            record["theta"] = self.threshold
        return record


# === MONOTONE FUNCTIONS ===

@functools.lru_cache(maxsize=None)
def _monotone_masks(n: int) -> np.ndarray:
    if n == 0:
        return np.array([0, 1], dtype=np.uint64)
    prev = _monotone_masks(n - 1)
    half = np.uint64(1 << (n - 1))
    pieces = []
    # Variable n-1 splits the table: low half is f0, high half is f1, f0 <= f1
    for f1 in prev:
        below = prev[(prev & np.invert(f1)) == 0]
        pieces.append(below | (f1 << half))
    masks = np.sort(np.concatenate(pieces))
    masks.setflags(write=False)
    return masks


def monotone_masks(n: int) -> np.ndarray:
    """Ascending uint64 array of every monotone mask of arity n."""
    if not 1 <= n <= MAX_ARITY:
        raise ContractViolation(f"arity must be in 1..{MAX_ARITY}, got {n}")
    masks = _monotone_masks(n)
    logger.debug("%d monotone functions of %d inputs", len(masks), n)
    return masks


def enumerate_monotone(n: int) -> FunctionSet:
    """Monotone increasing functions of n inputs, constants included."""
    return FunctionSet.from_masks(n, monotone_masks(n).tolist())


def brute_force_monotone(n: int) -> FunctionSet:
    """Same set by filtering all 2^(2^n) masks; only for n <= 4."""
    if not 1 <= n <= 4:
        raise ContractViolation(f"brute-force monotone filter supports n <= 4, got {n}")
    return FunctionSet.from_masks(
        n, (m for m in range(1 << (1 << n)) if is_monotone(TruthTable(n, m))))


# === SEPARABILITY ===

@functools.lru_cache(maxsize=None)
def _descending_weights(n: int, bound: int) -> np.ndarray:
    """Non-increasing weight vectors <= bound, smallest total first."""
    vectors = sorted(itertools.combinations_with_replacement(range(bound, -1, -1), n),
                     key=lambda v: (sum(v), v))
    table = np.array(vectors, dtype=np.int64)
    table.setflags(write=False)
    return table


def _incomparable_witness(tt: TruthTable) -> Optional[Tuple[int, int]]:
    """Two true points (q, r) proving some pair of inputs i, j incomparable.

    Swapping x_i and x_j in q and in r gives two false points with the same
    sum as q + r, so no weights separate the function. Found whenever
    neither trading x_i for x_j nor the reverse always keeps the output at
    least as high.
    """
    n, f = tt.arity, tt.mask
    for i, j in itertools.combinations(range(n), 2):
        vi, vj = variable_mask(n, i), variable_mask(n, j)
        shift = (1 << j) - (1 << i)
        moved = (f & vi & ~vj) << shift    # f(x_i=1, x_j=0) placed on x_i=0, x_j=1
        kept = f & vj & ~vi
        only_moved, only_kept = moved & ~kept, kept & ~moved
        if only_moved and only_kept:
            q = (only_moved & -only_moved).bit_length() - 1
            r = (only_kept & -only_kept).bit_length() - 1
            return q - shift, r
    return None


def _dominance_order(tt: TruthTable) -> List[int]:
    """Inputs sorted by how many true points they take part in, most first."""
    counts = [bin(tt.mask & variable_mask(tt.arity, i)).count("1") for i in range(tt.arity)]
    return sorted(range(tt.arity), key=lambda i: (-counts[i], i))


def _point_matrix(n: int, points: List[int], order: List[int]) -> np.ndarray:
    bits = assignment_matrix(n)[points]
    return bits[:, order]


def is_positive_threshold(tt: TruthTable, bound: Optional[int] = None) -> SeparabilityCertificate:
    """Decide whether nonnegative integer weights <= bound and theta >= 1 realize tt.

    Weights are tried non-increasing along the dominance order of the
    inputs; every realization can be rearranged that way without raising
    any weight.
    """
    n = tt.arity
    bound = ORACLE_WEIGHT_BOUND[n] if bound is None else bound
    pair = violating_monotone_pair(tt)
    if pair is not None:
        return SeparabilityCertificate(Outcome.NOT_SEPARABLE, violating_pair=pair,
                                       reason="not monotone")
    if tt.mask == 0:
        return SeparabilityCertificate(Outcome.SEPARABLE, (0,) * n, 1, reason="constant false")
    if tt.mask & 1:
        return SeparabilityCertificate(Outcome.NOT_SEPARABLE, reason="fires on the all-zero input")
    witness = _incomparable_witness(tt)
    if witness is not None:
        return SeparabilityCertificate(Outcome.NOT_SEPARABLE, violating_pair=witness,
                                       reason="incomparable inputs")

    order = _dominance_order(tt)
    candidates = _descending_weights(n, bound)
    lowest_true = (candidates @ _point_matrix(n, tt.minimal_true_points(), order).T).min(axis=1)
    false_points = tt.maximal_false_points()
    highest_false = (candidates @ _point_matrix(n, false_points, order).T).max(axis=1)
    fits = np.flatnonzero(lowest_true > highest_false)
    if fits.size == 0:
        return SeparabilityCertificate(Outcome.NOT_SEPARABLE,
                                       reason=f"no weights within bound {bound}")

    best = int(fits[0])
    weights = [0] * n
    for rank, i in enumerate(order):
        weights[i] = int(candidates[best, rank])
    params = LTUParams(tuple(weights), int(highest_false[best]) + 1)
    if ltu_truth_table(params).mask != tt.mask:
        raise RuntimeError(f"certificate {params} does not reproduce {tt}")
    return SeparabilityCertificate(Outcome.SEPARABLE, params.weights, params.threshold)


def brute_force_is_threshold(tt: TruthTable, bound: int) -> bool:
    """Unrestricted scan of every weight vector <= bound and every theta."""
    if tt.arity > 4:
        raise ContractViolation(f"brute-force scan supports n <= 4, got {tt.arity}")
    weights = np.array(list(itertools.product(range(bound + 1), repeat=tt.arity)), dtype=np.int64)
    drives = weights @ assignment_matrix(tt.arity).T
    return any(bool((masks == np.uint64(tt.mask)).any()) for _, masks in level_cuts(drives))


def _certify_chunk(task: Tuple[int, int, List[int]]) -> List[Dict]:
    n, bound, masks = task
    return [is_positive_threshold(TruthTable(n, m), bound).to_record(m) for m in masks]


def certify_all(n: int, bound: Optional[int] = None,
                manager: Optional[ConcurrencyManager] = None) -> List[Dict]:
    """Certificate records for every monotone function of arity n."""
    bound = ORACLE_WEIGHT_BOUND[n] if bound is None else bound
    manager = manager or ConcurrencyManager(1)
    masks = monotone_masks(n).tolist()
    tasks = ((n, bound, masks[i:i + CERTIFY_CHUNK]) for i in range(0, len(masks), CERTIFY_CHUNK))

    def extend(acc: List[Dict], part: List[Dict]) -> List[Dict]:
        acc.extend(part)
        return acc

    records = manager.map_reduce(_certify_chunk, tasks, extend, [])
    logger.info("Certified %d monotone functions of %d inputs (bound %d): %d separable",
                len(records), n, bound, sum(r["separable"] for r in records))
    return records


def bound_is_stable(n: int, bound: Optional[int] = None) -> Tuple[bool, List[int]]:
    """Separable counts at bound-2, bound-1 and bound; stable iff all equal."""
    bound = ORACLE_WEIGHT_BOUND[n] if bound is None else bound
    masks = monotone_masks(n).tolist()
    counts = []
    for b in range(max(bound - 2, 1), bound + 1):
        counts.append(sum(is_positive_threshold(TruthTable(n, m), b).separable for m in masks))
    return len(set(counts)) == 1, counts


# === DISK CACHE ===

def _cache_paths(directory: Path, n: int) -> Tuple[Path, Path]:
    return directory / f"oracle_n{n}.jsonl", directory / f"oracle_n{n}.sha256"


def _encode(records: List[Dict]) -> bytes:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records).encode("utf-8")


def _load_cache(directory: Path, n: int, bound: int) -> Optional[List[Dict]]:
    data_path, sum_path = _cache_paths(directory, n)
    if not data_path.exists() or not sum_path.exists():
        return None
    try:
        sidecar = json.loads(sum_path.read_text(encoding="utf-8"))
        raw = data_path.read_bytes()
    except (OSError, ValueError) as e:
        logger.warning("Unreadable oracle cache for n=%d: %s", n, e)
        return None
    if sidecar.get("bound") != bound:
        logger.info("Oracle cache for n=%d was built with bound %s, need %d",
                    n, sidecar.get("bound"), bound)
        return None
    if hashlib.sha256(raw).hexdigest() != sidecar.get("sha256"):
        raise _ChecksumMismatch(str(data_path))
    return [json.loads(line) for line in raw.decode("utf-8").splitlines() if line]


class _ChecksumMismatch(Exception):
    pass


def _write_cache(directory: Path, n: int, bound: int, records: List[Dict]) -> None:
    data_path, sum_path = _cache_paths(directory, n)
    raw = _encode(records)
    directory.mkdir(parents=True, exist_ok=True)
    data_path.write_bytes(raw)
    sum_path.write_text(json.dumps({"sha256": hashlib.sha256(raw).hexdigest(), "bound": bound,
                                    "n": n, "records": len(records)}, sort_keys=True),
                        encoding="utf-8")
    logger.info("Cached %d oracle records in %s", len(records), data_path)


def oracle_records(n: int, bound: Optional[int] = None, cache_dir: Optional[Union[str, Path]] = None,
                   use_cache: bool = True,
                   manager: Optional[ConcurrencyManager] = None) -> List[Dict]:
    """Certificate records, read from the cache when valid, rebuilt otherwise."""
    bound = ORACLE_WEIGHT_BOUND[n] if bound is None else bound
    if not use_cache:
        return certify_all(n, bound, manager)
    directory = config.cache_dir(str(cache_dir) if cache_dir else None)
    corrupt = False
    try:
        records = _load_cache(directory, n, bound)
    except _ChecksumMismatch as e:
        logger.warning("Oracle cache %s failed its checksum; regenerating", e)
        records, corrupt = None, True
    if records is not None:
        logger.debug("Loaded %d oracle records for n=%d from cache", len(records), n)
        return records
    records = certify_all(n, bound, manager)
    try:
        _write_cache(directory, n, bound, records)
    except OSError as e:
        if corrupt:
            raise OracleCacheError(f"corrupt oracle cache in {directory} cannot be replaced: {e}") from e
        logger.warning("Could not write oracle cache to %s: %s", directory, e)
    return records


def oracle_capacity(n: int, bound: Optional[int] = None, cache_dir: Optional[Union[str, Path]] = None,
                    use_cache: bool = True,
                    manager: Optional[ConcurrencyManager] = None) -> FunctionSet:
    """Positive threshold functions of n inputs, without constant TRUE."""
    if not 1 <= n <= MAX_ARITY:
        raise ContractViolation(f"arity must be in 1..{MAX_ARITY}, got {n}")
    records = oracle_records(n, bound, cache_dir, use_cache, manager)
    true_mask = full_mask(n)
    return FunctionSet.from_masks(
        n, (int(r["mask"], 16) for r in records if r["separable"] and int(r["mask"], 16) != true_mask))


def iter_certificates(n: int, bound: Optional[int] = None) -> Iterator[Tuple[TruthTable, SeparabilityCertificate]]:
    for mask in monotone_masks(n).tolist():
        tt = TruthTable(n, mask)
        yield tt, is_positive_threshold(tt, bound)
