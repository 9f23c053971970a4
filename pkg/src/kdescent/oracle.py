"""
Brute-force ground truth over all of ``S_n``.

Permutations are generated as numpy blocks in lexicographic order, one block
per first value, so memory stays at ``(n-1)! x n`` bytes at a time. Occurrence
sets of a consecutive pattern are encoded as bitmasks (bit ``i-1`` for start
index ``i``) and tallied with ``np.unique``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError

DEFAULT_CAP = 11

GROUPINGS = ("by_set", "by_set_and_first", "by_set_and_first_and_last")


def descent_set(w: Sequence[int], k: int) -> tuple[int, ...]:
    """
    1-based start indices of k-descents of ``w``, found by scanning decreasing runs.

    >>> descent_set([6, 3, 8, 5, 4, 1, 9, 7, 2], 3)
    (3, 4, 7)
    """
    out = []
    run = 1
    for j in range(1, len(w)):
        run = run + 1 if w[j] < w[j - 1] else 1
        if run >= k:
            out.append(j - k + 2)
    return tuple(out)


def pattern_positions(w: Sequence[int], pattern: Sequence[int]) -> tuple[int, ...]:
    """1-based start indices where ``w`` contains ``pattern`` consecutively."""
    k = len(pattern)
    target = tuple(np.argsort(pattern))
    return tuple(
        i + 1 for i in range(len(w) - k + 1)
        if tuple(np.argsort(w[i:i + k])) == target
    )


def _check_pattern(pattern: Sequence[int]) -> tuple[int, ...]:
    pattern = tuple(int(p) for p in pattern)
    if sorted(pattern) != list(range(1, len(pattern) + 1)):
        raise ParameterError(f"pattern must be a permutation of 1..k, got {pattern}")
    if len(pattern) < 2:
        raise ParameterError("pattern length must be >= 2")
    return pattern


@dataclass(frozen=True)
class PatternQuery:
    """Which pattern, which ``n``, and how to group the occurrence-set counts."""

    n: int
    pattern: tuple[int, ...]
    grouping: str = "by_set"

    def __post_init__(self):
        object.__setattr__(self, "pattern", _check_pattern(self.pattern))
        if self.grouping not in GROUPINGS:
            raise ParameterError(f"grouping must be one of {GROUPINGS}")
        if not 2 <= self.k <= self.n:
            raise ParameterError(f"need 2 <= k <= n, got k={self.k}, n={self.n}")

    @property
    def k(self) -> int:
        return len(self.pattern)

    @classmethod
    def kdescent(cls, k: int, n: int, grouping: str = "by_set") -> "PatternQuery":
        return cls(n=n, pattern=tuple(range(k, 0, -1)), grouping=grouping)


Key = tuple  # (I,) or (I, m) or (I, m1, m2)


@dataclass
class OracleReport:
    """Exact counts keyed by ``(I,)``, ``(I, m)`` or ``(I, m1, m2)`` depending on grouping."""

    query: PatternQuery
    counts: dict[Key, int] = field(default_factory=dict)

    def total(self) -> int:
        return sum(self.counts.values())

    def get(self, I: Iterable[int] = (), m: int | None = None, m2: int | None = None) -> int:
        key: tuple = (tuple(sorted(I)),)
        if m is not None:
            key += (m,)
        if m2 is not None:
            key += (m2,)
        return self.counts.get(key, 0)

    def marginal(self, grouping: str) -> "OracleReport":
        """Sum out the trailing key components down to a coarser grouping."""
        if GROUPINGS.index(grouping) > GROUPINGS.index(self.query.grouping):
            raise ParameterError("cannot refine a grouping")
        width = GROUPINGS.index(grouping) + 1
        out: Counter = Counter()
        for key, c in self.counts.items():
            out[key[:width]] += c
        q = PatternQuery(self.query.n, self.query.pattern, grouping)
        return OracleReport(q, dict(out))

    def merge(self, other: "OracleReport") -> "OracleReport":
        if other.query != self.query:
            raise ParameterError("can only merge reports for the same query")
        out = Counter(self.counts)
        out.update(other.counts)
        return OracleReport(self.query, dict(out))

    @staticmethod
    def key_string(key: Key) -> str:
        parts = ["I=[" + ",".join(str(i) for i in key[0]) + "]"]
        names = ("m1", "m2") if len(key) == 3 else ("m",)
        parts += [f"{name}={v}" for name, v in zip(names, key[1:])]
        return ";".join(parts)

    def to_json(self) -> str:
        items = sorted(self.counts.items(), key=lambda kv: (len(kv[0][0]), kv[0]))
        return json.dumps({self.key_string(k): str(v) for k, v in items})


@lru_cache(maxsize=4)
def _all_perms(n: int) -> np.ndarray:
    """All permutations of ``0..n-1`` in lexicographic order, shape ``(n!, n)``."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for size in range(1, n + 1):
        blocks = []
        for first in range(size):
            rest = perms + (perms >= first)
            col = np.full((rest.shape[0], 1), first, dtype=np.int8)
            blocks.append(np.hstack([col, rest.astype(np.int8)]))
        perms = np.vstack(blocks)
    perms.setflags(write=False)
    return perms


def _block(n: int, first: int) -> np.ndarray:
    """Permutations of ``0..n-1`` that start with ``first`` (0-based)."""
    rest = _all_perms(n - 1)
    out = np.empty((rest.shape[0], n), dtype=np.int8)
    out[:, 0] = first
    out[:, 1:] = rest + (rest >= first)
    return out


def _occurrence_masks(perms: np.ndarray, pattern: tuple[int, ...]) -> np.ndarray:
    n = perms.shape[1]
    k = len(pattern)
    masks = np.zeros(perms.shape[0], dtype=np.int64)
    decreasing = pattern == tuple(range(k, 0, -1))
    if decreasing:
        desc = perms[:, :-1] > perms[:, 1:]
    for i in range(n - k + 1):
        if decreasing:
            hit = desc[:, i:i + k - 1].all(axis=1)
        else:
            hit = np.ones(perms.shape[0], dtype=bool)
            for a in range(k):
                for b in range(a + 1, k):
                    lt = perms[:, i + a] < perms[:, i + b]
                    hit &= lt if pattern[a] < pattern[b] else ~lt
        masks |= hit.astype(np.int64) << i
    return masks


def _mask_to_set(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def enumerate_counts(query: PatternQuery, cap: int = DEFAULT_CAP) -> OracleReport:
    """Count every permutation of ``[n]`` by occurrence set (and first/last value)."""
    n = query.n
    if n > cap:
        raise ParameterError(
            f"n={n} exceeds the oracle cap {cap} ({factorial(n)} permutations); "
            "raise the cap explicitly to proceed"
        )
    report = OracleReport(query)
    for first in range(n):
        perms = _block(n, first)
        masks = _occurrence_masks(perms, query.pattern)
        if query.grouping == "by_set_and_first_and_last":
            keys = masks * (n + 1) + perms[:, -1].astype(np.int64) + 1
        else:
            keys = masks
        uniq, cnt = np.unique(keys, return_counts=True)
        part: dict[Key, int] = {}
        for key, c in zip(uniq.tolist(), cnt.tolist()):
            if query.grouping == "by_set_and_first_and_last":
                mask, last = divmod(key, n + 1)
                part[(_mask_to_set(mask), first + 1, last)] = c
            elif query.grouping == "by_set_and_first":
                part[(_mask_to_set(key), first + 1)] = c
            else:
                part[(_mask_to_set(key),)] = c
        report = report.merge(OracleReport(query, part))
    return report


def joint_counts(k: int, n: int, cap: int = DEFAULT_CAP) -> list[list[int]]:
    """``table[m1-1][m2-1] = f_k(m1, m2, n)``: k-descent-free with ``w(1)=m1``, ``w(n)=m2``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if n < k:
        # no k-descent fits; every permutation qualifies
        table = [[0] * n for _ in range(n)]
        for w in _all_perms(n):
            table[w[0]][w[-1]] += 1
        return table
    report = enumerate_counts(PatternQuery.kdescent(k, n, "by_set_and_first_and_last"), cap)
    table = [[0] * n for _ in range(n)]
    for (I, m1, m2), c in report.counts.items():
        if not I:
            table[m1 - 1][m2 - 1] = c
    return table
