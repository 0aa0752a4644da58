#!/usr/bin/env python3
"""
TRUTH TABLES
============

Canonical bitmask form of Boolean functions of up to six variables.

Bit p of a mask is the output on the assignment whose variable i equals
bit i of p (variable 0 is the least significant bit). Every other module
shares this convention.
"""

from dataclasses import dataclass
import functools
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple
import logging

logger = logging.getLogger(__name__)

MAX_ARITY = 6


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (arity, dimension, range)."""


def _check_arity(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_ARITY:
        raise ContractViolation(f"arity must be an integer in 1..{MAX_ARITY}, got {n!r}")


def full_mask(n: int) -> int:
    """All 2^n output bits set."""
    return (1 << (1 << n)) - 1


@functools.lru_cache(maxsize=None)
def variable_mask(n: int, i: int) -> int:
    """Positions p < 2^n whose bit i is set."""
    return sum(1 << p for p in range(1 << n) if (p >> i) & 1)


# Built once; indexed [n][i]
_VARIABLE_MASKS: Dict[int, Tuple[int, ...]] = {
    n: tuple(variable_mask(n, i) for i in range(n)) for n in range(1, MAX_ARITY + 1)
}


def _positions(mask: int) -> List[int]:
    points = []
    while mask:
        low = mask & -mask
        points.append(low.bit_length() - 1)
        mask ^= low
    return points


def assignment_index(assignment: Sequence[int]) -> int:
    """Bit-vector (variable 0 first) to its position in the mask."""
    index = 0
    for i, bit in enumerate(assignment):
        if bit not in (0, 1, True, False):
            raise ContractViolation(f"assignment entries must be 0 or 1, got {bit!r} at {i}")
        if bit:
            index |= 1 << i
    return index


def index_assignment(n: int, p: int) -> Tuple[int, ...]:
    """Position p back to its bit-vector."""
    return tuple((p >> i) & 1 for i in range(n))


@dataclass(frozen=True)
class TruthTable:
    """A Boolean function of `arity` inputs stored as a 2^arity-bit mask"""
    arity: int
    mask: int

    def __post_init__(self):
        _check_arity(self.arity)
        if not isinstance(self.mask, int) or self.mask < 0:
            raise ContractViolation(f"mask must be a nonnegative integer, got {self.mask!r}")
        if self.mask & ~full_mask(self.arity):
            raise ContractViolation(
                f"mask {self.mask:#x} has bits beyond position {(1 << self.arity) - 1}")

    @classmethod
    def constant(cls, n: int, value: bool) -> 'TruthTable':
        return cls(n, full_mask(n) if value else 0)

    @classmethod
    def variable(cls, n: int, i: int) -> 'TruthTable':
        _check_arity(n)
        if not 0 <= i < n:
            raise ContractViolation(f"variable index {i} out of range for arity {n}")
        return cls(n, _VARIABLE_MASKS[n][i])

    @classmethod
    def from_function(cls, n: int, fn: Callable[[Tuple[int, ...]], int]) -> 'TruthTable':
        """Tabulate `fn` over all 2^n assignments."""
        _check_arity(n)
        mask = 0
        for p in range(1 << n):
            if fn(index_assignment(n, p)):
                mask |= 1 << p
        return cls(n, mask)

    @classmethod
    def from_hex(cls, n: int, text: str) -> 'TruthTable':
        return cls(n, int(text, 16))

    def to_hex(self) -> str:
        return hex(self.mask)

    def count(self) -> int:
        """Size of the on-set."""
        return bin(self.mask).count("1")

    def true_points(self) -> List[int]:
        return [p for p in range(1 << self.arity) if (self.mask >> p) & 1]

    def false_points(self) -> List[int]:
        return [p for p in range(1 << self.arity) if not (self.mask >> p) & 1]

    def minimal_true_points(self) -> List[int]:
        """True points whose every single-bit drop is false.

        For a monotone function these are the minimal true points.
        """
        covered = 0
        for i, var in enumerate(_VARIABLE_MASKS[self.arity]):
            covered |= (self.mask & ~var) << (1 << i)
        return _positions(self.mask & ~covered)

    def maximal_false_points(self) -> List[int]:
        """False points whose every single-bit raise is true."""
        falses = ~self.mask & full_mask(self.arity)
        covered = 0
        for i, var in enumerate(_VARIABLE_MASKS[self.arity]):
            covered |= (falses & var) >> (1 << i)
        return _positions(falses & ~covered)

    def __str__(self) -> str:
        return f"TruthTable(n={self.arity}, mask={self.to_hex()})"


def evaluate(tt: TruthTable, assignment: Sequence[int]) -> int:
    """Output bit of `tt` on `assignment`."""
    if len(assignment) != tt.arity:
        raise ContractViolation(
            f"assignment has {len(assignment)} entries, truth table arity is {tt.arity}")
    return (tt.mask >> assignment_index(assignment)) & 1


def violating_monotone_pair(tt: TruthTable) -> Optional[Tuple[int, int]]:
    """First (p, q) with p below q, f(p)=1 and f(q)=0, or None if monotone."""
    n = tt.arity
    for i, var in enumerate(_VARIABLE_MASKS[n]):
        low = tt.mask & ~var & full_mask(n)
        high = (tt.mask & var) >> (1 << i)
        broken = low & ~high
        if broken:
            p = (broken & -broken).bit_length() - 1
            return p, p | (1 << i)
    return None


def is_monotone(tt: TruthTable) -> bool:
    """True iff raising any input never lowers the output.

    Checking single-variable flips suffices: any p below q is reached from p
    by a chain of such flips.
    """
    return violating_monotone_pair(tt) is None


class FunctionSet:
    """Deduplicated masks of a fixed arity"""

    def __init__(self, arity: int, masks: Optional[Iterable[int]] = None):
        _check_arity(arity)
        self.arity = arity
        self._limit = full_mask(arity)
        self._members: Set[int] = set()
        if masks is not None:
            self.update_masks(masks)

    @classmethod
    def from_masks(cls, arity: int, masks: Iterable[int]) -> 'FunctionSet':
        return cls(arity, masks)

    def add(self, tt: TruthTable) -> bool:
        """Insert; returns True when the mask was new."""
        if tt.arity != self.arity:
            raise ContractViolation(
                f"cannot insert arity-{tt.arity} function into arity-{self.arity} set")
        return self.add_mask(tt.mask)

    def add_mask(self, mask: int) -> bool:
        mask = int(mask)
        if mask < 0 or mask & ~self._limit:
            raise ContractViolation(f"mask {mask:#x} does not fit arity {self.arity}")
        before = len(self._members)
        self._members.add(mask)
        return len(self._members) != before

    def update_masks(self, masks: Iterable[int]) -> None:
        for mask in masks:
            self.add_mask(mask)

    def union(self, other: 'FunctionSet') -> 'FunctionSet':
        self._same_arity(other)
        merged = FunctionSet(self.arity)
        merged._members = self._members | other._members
        return merged

    def issubset(self, other: 'FunctionSet') -> bool:
        self._same_arity(other)
        return self._members <= other._members

    def difference(self, other: 'FunctionSet') -> 'FunctionSet':
        self._same_arity(other)
        result = FunctionSet(self.arity)
        result._members = self._members - other._members
        return result

    def sorted_masks(self) -> List[int]:
        return sorted(self._members)

    def truth_tables(self) -> Iterator[TruthTable]:
        for mask in self.sorted_masks():
            yield TruthTable(self.arity, mask)

    def _same_arity(self, other: 'FunctionSet') -> None:
        if other.arity != self.arity:
            raise ContractViolation(f"arity mismatch: {self.arity} vs {other.arity}")

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, item) -> bool:
        if isinstance(item, TruthTable):
            return item.arity == self.arity and item.mask in self._members
        return int(item) in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self.sorted_masks())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunctionSet):
            return NotImplemented
        return self.arity == other.arity and self._members == other._members

    def __repr__(self) -> str:
        return f"FunctionSet(arity={self.arity}, size={len(self)})"


def insert(fs: FunctionSet, tt: TruthTable) -> FunctionSet:
    """Add `tt` to `fs` and hand the same set back."""
    fs.add(tt)
    return fs
