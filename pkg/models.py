#!/usr/bin/env python3
"""
NEURON MODELS
=============

Exact integer semantics of the two threshold devices:

- LTU: weighted sum of binary inputs, fires iff the sum reaches theta.
- nLTU: inputs drive dendritic subunits; each subunit clips its summed drive
  at its saturation level, the clipped outputs are summed and thresholded.

Weights count synapses (nonnegative integers), thresholds are >= 1, so both
devices only ever compute monotone increasing functions.
"""

import functools
import json
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Sequence, Tuple, Union

import numpy as np

from truthtable import ContractViolation, TruthTable, MAX_ARITY


def _as_int(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ContractViolation(f"{what} must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class LTUParams:
    """Synapse counts per input plus firing threshold"""
    weights: Tuple[int, ...]
    threshold: int

    def __post_init__(self):
        weights = tuple(_as_int(w, "weight") for w in self.weights)
        if not weights:
            raise ContractViolation("an LTU needs at least one input")
        if any(w < 0 for w in weights):
            raise ContractViolation(f"weights must be nonnegative, got {weights}")
        threshold = _as_int(self.threshold, "threshold")
        if threshold < 1:
            raise ContractViolation(f"threshold must be >= 1, got {threshold}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "threshold", threshold)

    @property
    def n(self) -> int:
        return len(self.weights)

    def sort_key(self) -> Tuple:
        return (0, self.weights, self.threshold)

    def to_dict(self) -> Dict[str, Any]:
        return {"model": "ltu", "n": self.n, "weights": list(self.weights),
                "theta": self.threshold}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class NLTUParams:
    """Subunit weight matrix (rows are subunits), saturations and threshold"""
    subunit_weights: Tuple[Tuple[int, ...], ...]
    saturations: Tuple[int, ...]
    threshold: int

    def __post_init__(self):
        rows = tuple(tuple(_as_int(w, "weight") for w in row) for row in self.subunit_weights)
        if not rows:
            raise ContractViolation("an nLTU needs at least one subunit")
        n = len(rows[0])
        if n == 0 or any(len(row) != n for row in rows):
            raise ContractViolation("every subunit row must have the same nonzero length")
        if any(w < 0 for row in rows for w in row):
            raise ContractViolation("subunit weights must be nonnegative")
        saturations = tuple(_as_int(s, "saturation") for s in self.saturations)
        if len(saturations) != len(rows):
            raise ContractViolation(
                f"{len(rows)} subunits but {len(saturations)} saturation levels")
        if any(s < 1 for s in saturations):
            raise ContractViolation(f"saturations must be >= 1, got {saturations}")
        threshold = _as_int(self.threshold, "threshold")
        if threshold < 1:
            raise ContractViolation(f"threshold must be >= 1, got {threshold}")
        object.__setattr__(self, "subunit_weights", rows)
        object.__setattr__(self, "saturations", saturations)
        object.__setattr__(self, "threshold", threshold)

    @property
    def n(self) -> int:
        return len(self.subunit_weights[0])

    @property
    def d(self) -> int:
        return len(self.subunit_weights)

    def synapses_per_input(self) -> Tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.subunit_weights))

    def sort_key(self) -> Tuple:
        return (1, self.subunit_weights, self.saturations, self.threshold)

    def to_dict(self) -> Dict[str, Any]:
        return {"model": "nltu", "n": self.n,
                "subunit_weights": [list(row) for row in self.subunit_weights],
                "saturations": list(self.saturations), "theta": self.threshold}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


Params = Union[LTUParams, NLTUParams]


def params_from_json(data: Union[str, Dict[str, Any]]) -> Params:
    """Inverse of `to_json` / `to_dict`."""
    if isinstance(data, str):
        data = json.loads(data)
    model = data.get("model")
    if model == "ltu":
        params = LTUParams(tuple(data["weights"]), data["theta"])
    elif model == "nltu":
        params = NLTUParams(tuple(tuple(r) for r in data["subunit_weights"]),
                            tuple(data["saturations"]), data["theta"])
    else:
        raise ContractViolation(f"unknown model {model!r}")
    if params.n != data.get("n", params.n):
        raise ContractViolation(f"declared n={data['n']} but parameters have n={params.n}")
    return params


# === BATCHED EVALUATION ===

@functools.lru_cache(maxsize=None)
def assignment_matrix(n: int) -> np.ndarray:
    """(2^n, n) matrix; row p is the bit-vector of assignment p."""
    if not 1 <= n <= MAX_ARITY:
        raise ContractViolation(f"arity must be in 1..{MAX_ARITY}, got {n}")
    p = np.arange(1 << n, dtype=np.int64)
    matrix = (p[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    matrix.setflags(write=False)
    return matrix


@functools.lru_cache(maxsize=None)
def _bit_values(points: int) -> np.ndarray:
    bits = np.left_shift(np.uint64(1), np.arange(points, dtype=np.uint64))
    bits.setflags(write=False)
    return bits


def pack_masks(fire: np.ndarray) -> np.ndarray:
    """Boolean outputs over the last axis (length 2^n) to uint64 masks."""
    bits = _bit_values(fire.shape[-1])
    return np.bitwise_or.reduce(np.where(fire, bits, np.uint64(0)), axis=-1)


def level_cuts(totals: np.ndarray) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (theta, masks) for every theta from 1 to max(totals) + 1.

    `totals` is (rows, 2^n); masks[r] is the function firing where row r
    reaches theta. Thetas above a row's maximum give constant FALSE.
    """
    top = int(totals.max()) if totals.size else 0
    for theta in range(1, top + 2):
        yield theta, pack_masks(totals >= theta)


def level_set_masks(totals: np.ndarray) -> np.ndarray:
    """Distinct masks over every threshold cut of every row of `totals`."""
    if totals.size == 0:
        return np.zeros(0, dtype=np.uint64)
    return np.unique(np.concatenate([masks for _, masks in level_cuts(totals)]))


def nltu_totals(weights: np.ndarray, saturations: np.ndarray) -> np.ndarray:
    """Somatic sums for a batch of saturation vectors over one weight matrix.

    weights is (d, n); saturations is (c, d); result is (c, 2^n).
    """
    drives = weights @ assignment_matrix(weights.shape[1]).T
    return np.minimum(drives[None, :, :], saturations[:, :, None]).sum(axis=1)


# === SINGLE-DEVICE SEMANTICS ===

def _check_assignment(n: int, assignment: Sequence[int]) -> None:
    if len(assignment) != n:
        raise ContractViolation(f"assignment has {len(assignment)} entries, model has {n} inputs")
    if any(x not in (0, 1) for x in assignment):
        raise ContractViolation(f"assignment must be a bit-vector, got {tuple(assignment)}")


def ltu_output(p: LTUParams, assignment: Sequence[int]) -> int:
    """1 iff sum_i w_i x_i >= theta."""
    _check_assignment(p.n, assignment)
    return int(sum(w * x for w, x in zip(p.weights, assignment)) >= p.threshold)


def subunit_activations(p: NLTUParams, assignment: Sequence[int]) -> Tuple[int, ...]:
    _check_assignment(p.n, assignment)
    return tuple(min(sum(w * x for w, x in zip(row, assignment)), s)
                 for row, s in zip(p.subunit_weights, p.saturations))


def nltu_output(p: NLTUParams, assignment: Sequence[int]) -> int:
    """1 iff sum_j min(sum_i w_ji x_i, s_j) >= theta."""
    return int(sum(subunit_activations(p, assignment)) >= p.threshold)


def ltu_truth_table(p: LTUParams) -> TruthTable:
    drives = assignment_matrix(p.n) @ np.asarray(p.weights, dtype=np.int64)
    return TruthTable(p.n, int(pack_masks(drives >= p.threshold)))


def nltu_truth_table(p: NLTUParams) -> TruthTable:
    weights = np.asarray(p.subunit_weights, dtype=np.int64)
    saturations = np.asarray([p.saturations], dtype=np.int64)
    totals = nltu_totals(weights, saturations)[0]
    return TruthTable(p.n, int(pack_masks(totals >= p.threshold)))


def truth_table(p: Params) -> TruthTable:
    if isinstance(p, LTUParams):
        return ltu_truth_table(p)
    return nltu_truth_table(p)


# Fires on AC or BC but not AB. The LTU gives C two synapses; the nLTU
# puts A and B on one saturating subunit and C on another.
EXAMPLE_LTU = LTUParams((1, 1, 2), 3)
EXAMPLE_NLTU = NLTUParams(((1, 1, 0), (0, 0, 1)), (1, 1), 2)
EXAMPLE_MASK = 0xE0
