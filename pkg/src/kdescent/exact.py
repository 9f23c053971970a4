"""
Exact counts of permutations by k-descent set.

A k-descent of ``w`` is a start index ``i`` with ``w(i) > w(i+1) > ... > w(i+k-1)``.
Everything here is exact Python ``int`` arithmetic:

* :func:`build_triangle` builds ``f_k(m, n)``, the number of k-descent-free
  permutations of ``[n]`` starting with ``m``, row by row via k antidifferences.
* :func:`count_with_set` / :func:`parametrized_count` count permutations whose
  k-descent set is exactly ``I`` with an insertion DP over (last rank, run length).
* :func:`build_general_table` tabulates ``d_k(r_n(I), m, n)`` the same way the
  triangle is built, seeded by the DP.

>>> tri = build_triangle(3, 7)
>>> tri.row(7)
[349, 349, 332, 303, 267, 228, 189]
>>> count_with_set(DescentSpec(3, (1,)), 4)
3
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from itertools import accumulate
from math import comb, factorial
from typing import Iterable, Sequence

from .errors import ParameterError

__all__ = [
    "binom", "forward_difference", "kth_difference",
    "DescentSpec", "CountTriangle", "GeneralTable",
    "build_triangle", "f_total", "fmn_alternating",
    "reverse_set", "last_value_counts", "count_with_set",
    "parametrized_row", "parametrized_count", "build_general_table",
    "sandwich_bounds", "g3_sequence", "g3_diagonal_residuals",
]


def binom(a: int, b: int) -> int:
    """Binomial coefficient that is 0 outside ``0 <= b <= a``, except ``binom(a, 0) = 1`` for every ``a``."""
    if b == 0:
        return 1
    if b < 0 or a < b:
        return 0
    return comb(a, b)


def forward_difference(seq: Sequence[int]) -> list[int]:
    """``(a_2 - a_1, a_3 - a_2, ...)``; empty for sequences shorter than 2."""
    return [b - a for a, b in zip(seq, seq[1:])]


def kth_difference(seq: Sequence[int], k: int) -> list[int]:
    out = list(seq)
    for _ in range(k):
        out = forward_difference(out)
    return out


@dataclass(frozen=True)
class DescentSpec:
    """A k-descent set problem: ``k`` and the prescribed start indices ``I``."""

    k: int
    I: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise ParameterError(f"k must be an integer >= 2, got {self.k!r}")
        I = tuple(int(i) for i in self.I)
        if any(i < 1 for i in I):
            raise ParameterError(f"descent indices must be >= 1, got {I}")
        if len(set(I)) != len(I):
            raise ParameterError(f"descent indices must be distinct, got {I}")
        object.__setattr__(self, "I", tuple(sorted(I)))

    @property
    def t(self) -> int:
        """Index of the end of the last prescribed k-descent (0 when ``I`` is empty)."""
        return self.I[-1] + self.k - 1 if self.I else 0

    def reversed_at(self, n: int) -> "DescentSpec":
        return DescentSpec(self.k, reverse_set(self.I, n, self.k))


@dataclass
class CountTriangle:
    """
    ``f_k(m, n)`` for ``1 <= m <= n <= max_n``.

    Entries live in one flat list, row after row; row ``n`` starts at
    offset ``n(n-1)/2``.
    """

    k: int
    max_n: int
    data: list[int] = field(repr=False)

    @staticmethod
    def _offset(n: int) -> int:
        return n * (n - 1) // 2

    def _check_row(self, n: int) -> None:
        if not 1 <= n <= self.max_n:
            raise ParameterError(f"row {n} outside triangle 1..{self.max_n}")

    def entry(self, m: int, n: int) -> int:
        self._check_row(n)
        if not 1 <= m <= n:
            raise ParameterError(f"m={m} outside 1..{n}")
        return self.data[self._offset(n) + m - 1]

    def row(self, n: int) -> list[int]:
        self._check_row(n)
        start = self._offset(n)
        return self.data[start:start + n]

    def row_sum(self, n: int) -> int:
        return sum(self.row(n))

    def rows(self) -> Iterable[tuple[int, list[int]]]:
        for n in range(1, self.max_n + 1):
            yield n, self.row(n)

    def records(self) -> list[dict]:
        return [
            {"k": self.k, "n": n, "m": m, "value": str(v)}
            for n, row in self.rows()
            for m, v in enumerate(row, start=1)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "n", "m", "value"])
        for rec in self.records():
            writer.writerow([rec["k"], rec["n"], rec["m"], rec["value"]])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.records())


def _antidifference_row(base: Sequence[int], lead: int, k: int) -> list[int]:
    """
    Row ``n+k`` from row ``n`` (its k-th forward difference) and the value
    of the new row's first entry.

    Anchors: the first antidifference ends in 0, antidifferences 2..k-1 start
    with 0, and the k-th starts with ``lead``.
    """
    level = list(base)
    # first antidifference: filled backwards from a trailing zero
    acc = [0] * (len(level) + 1)
    for j in range(len(level) - 1, -1, -1):
        acc[j] = acc[j + 1] - level[j]
    level = acc
    for step in range(2, k + 1):
        start = lead if step == k else 0
        level = list(accumulate(level, initial=start))
    return level


def _seed_row(k: int, n: int) -> list[int]:
    row = [factorial(n - 1)] * n
    if n == k:
        row[-1] -= 1
    return row


def build_triangle(k: int, N: int) -> CountTriangle:
    """Exact triangle ``f_k(m, n)`` for ``n <= N`` in ``O(k N^2)`` big-integer additions."""
    if not isinstance(k, int) or k < 2:
        raise ParameterError(f"k must be an integer >= 2, got {k!r}")
    if not isinstance(N, int) or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N!r}")
    data: list[int] = []
    sums = [1]  # sums[n] = f_k(n), with f_k(0) = 1
    for n in range(1, N + 1):
        if n <= k:
            row = _seed_row(k, n)
        else:
            prev = data[CountTriangle._offset(n - k):CountTriangle._offset(n - k) + n - k]
            row = _antidifference_row(prev, sums[n - 1], k)
        data.extend(row)
        sums.append(sum(row))
    return CountTriangle(k=k, max_n=N, data=data)


def _f_conv(tri: CountTriangle, j: int) -> int:
    # f_k(0) = 1 (empty permutation), f_k(j) = 0 for j < 0
    if j < 0:
        return 0
    if j == 0:
        return 1
    return tri.row_sum(j)


def f_total(tri: CountTriangle, n: int) -> int:
    """``f_k(n)``, the number of k-descent-free permutations of ``[n]``."""
    tri._check_row(n)
    return tri.row_sum(n)


def fmn_alternating(k: int, m: int, n: int, tri: CountTriangle) -> int:
    """
    ``f_k(m, n)`` from row sums alone:
    ``sum_j [binom(m-1, jk) f_k(n-jk-1) - binom(m-1, jk+k-1) f_k(n-jk-k)]``.
    """
    if tri.k != k:
        raise ParameterError(f"triangle is for k={tri.k}, not {k}")
    if not 1 <= m <= n:
        raise ParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    if n - 1 > tri.max_n:
        raise ParameterError(f"triangle must cover n-1={n - 1}")
    total = 0
    for ell in range(0, m):
        if ell % k == 0:
            total += binom(m - 1, ell) * _f_conv(tri, n - 1 - ell)
        elif ell % k == k - 1:
            total -= binom(m - 1, ell) * _f_conv(tri, n - 1 - ell)
    return total


def reverse_set(I: Iterable[int], n: int, k: int) -> tuple[int, ...]:
    """Image of a k-descent set under reverse-complement of a permutation of ``[n]``."""
    return tuple(sorted(n + 2 - k - i for i in I))


def last_value_counts(k: int, I: Iterable[int], n: int) -> list[int]:
    """
    ``out[v-1]`` = number of ``w`` in ``S_n`` with k-descent set exactly ``I``
    and ``w(n) = v``.

    Elements are inserted left to right by relative rank; the state is
    (rank of the current last element, length of the decreasing run ending
    there capped at k). Prefix sums keep each step at ``O(i k)``.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    required = frozenset(I)
    if any(i > n - k + 1 for i in required):
        return [0] * n
    # cnt[L][r]: run length L+1, last rank r+1
    cnt = [[0] for _ in range(k)]
    cnt[0][0] = 1
    for i in range(1, n):
        pos = i + 1
        totals = [sum(col) for col in zip(*cnt)]
        new = [[0] * (i + 1) for _ in range(k)]
        # ascent: new rank r' > old rank r
        new[0] = list(accumulate(totals, initial=0))
        # descent: new rank r' <= old rank r, run length grows
        for L in range(k):
            suffix = list(accumulate(reversed(cnt[L])))[::-1]
            target = new[min(L + 1, k - 1)]
            for r in range(i):
                target[r] += suffix[r]
        if pos >= k:
            if pos - k + 1 in required:
                for L in range(k - 1):
                    new[L] = [0] * (i + 1)
            else:
                new[k - 1] = [0] * (i + 1)
        cnt = new
    return [sum(col) for col in zip(*cnt)]


def count_with_set(spec: DescentSpec, n: int) -> int:
    """``d_k(I, n)``: permutations of ``[n]`` whose k-descent set is exactly ``I``."""
    return sum(last_value_counts(spec.k, spec.I, n))


def parametrized_row(spec: DescentSpec, n: int) -> list[int]:
    """``[d_k(I, m, n) for m in 1..n]`` from a single DP run on the reversed set."""
    if n < spec.t:
        return [0] * n
    counts = last_value_counts(spec.k, reverse_set(spec.I, n, spec.k), n)
    # w(1) = m  <=>  rc(w)(n) = n + 1 - m
    return counts[::-1]


def parametrized_count(spec: DescentSpec, m: int, n: int) -> int:
    """``d_k(I, m, n)``: as :func:`count_with_set`, also requiring ``w(1) = m``."""
    if not 1 <= m <= n:
        raise ParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    return parametrized_row(spec, n)[m - 1]


@dataclass
class GeneralTable:
    """Rows ``(d_k(r_n(I), m, n))_m`` for ``n = 1..max_n``; all-zero where ``n < t``."""

    spec: DescentSpec
    max_n: int
    table: list[list[int]] = field(repr=False)

    def row(self, n: int) -> list[int]:
        if not 1 <= n <= self.max_n:
            raise ParameterError(f"row {n} outside 1..{self.max_n}")
        return self.table[n - 1]

    def entry(self, m: int, n: int) -> int:
        return self.row(n)[m - 1]

    def row_sum(self, n: int) -> int:
        return sum(self.row(n))


def build_general_table(spec: DescentSpec, max_n: int) -> GeneralTable:
    """
    Rows up to ``t + k - 1`` come from the insertion DP; later rows from
    ``k`` antidifferences of the row ``k`` above, with first entry equal to
    the previous row's sum.
    """
    k = spec.k
    if max_n < 1:
        raise ParameterError(f"max_n must be >= 1, got {max_n}")
    first_rec = max(spec.t, k - 1) + k  # rows from here on use the recurrence
    table: list[list[int]] = []
    for n in range(1, max_n + 1):
        if n < first_rec:
            # row n of the table is for r_n(I); reverse-complementing back
            # turns "first element m" into "last element n+1-m" under set I
            if n < spec.t:
                row = [0] * n
            else:
                row = last_value_counts(k, spec.I, n)[::-1]
        else:
            row = _antidifference_row(table[n - k - 1], sum(table[n - 2]), k)
        table.append(row)
    return GeneralTable(spec=spec, max_n=max_n, table=table)


def sandwich_bounds(k: int, m1: int, m2: int, n: int, tri: CountTriangle) -> tuple[int, int]:
    """
    Lower and upper bounds on ``f_k(m1, m2, n)``, the number of k-descent-free
    permutations with ``w(1) = m1`` and ``w(n) = m2``, for ``m1 <= m2``.

    ``binom(-1, 0)`` is taken as 1. A term whose tail ``n - ell`` is empty
    contributes 0 (that case needs ``w(1) = w(n)``).
    """
    if tri.k != k:
        raise ParameterError(f"triangle is for k={tri.k}, not {k}")
    if not 1 <= m1 <= m2 <= n:
        raise ParameterError(f"need 1 <= m1 <= m2 <= n, got {m1}, {m2}, {n}")
    if n - 1 > tri.max_n:
        raise ParameterError(f"triangle must cover n-1={n - 1}")

    def f(m: int, size: int) -> int:
        return tri.entry(m, size) if size >= 1 else 0

    lower = upper = 0
    for ell in range(1, m1 + 1):
        size = n - ell
        small = f(min(size, n + 1 - m2), size) if size >= 1 else 0
        big = f(max(1, size + 1 - m2), size) if size >= 1 else 0
        if ell % k == 1 % k:
            lower += binom(m1 - 2, ell - 1) * small
            upper += binom(m1 - 1, ell - 1) * big
        if ell % k == 0:
            lower -= binom(m1 - 1, ell - 1) * big
            upper -= binom(m1 - 2, ell - 1) * small
    return lower, upper


def g3_sequence(tri: CountTriangle, n: int) -> int:
    """``g_3(n)``: 3-descent-free permutations of ``[n]`` not starting with a descent."""
    if tri.k != 3:
        raise ParameterError("g_3 needs the k=3 triangle")
    if n < 1 or n + 1 > tri.max_n:
        raise ParameterError(f"need 1 <= n and n+1 <= {tri.max_n}")
    return tri.entry(n + 1, n + 1)


def g3_diagonal_residuals(tri: CountTriangle, n: int) -> tuple[int, int, int]:
    """
    Residuals of the three last-diagonal identities of the k=3 triangle at row ``n >= 4``:
    ``f(n,n) = g(n-1)``, ``f(n-1,n) = g(n-1)+g(n-2)``, ``f(n-2,n) = g(n-1)+2g(n-2)``.
    All zero when they hold.
    """
    if n < 4:
        raise ParameterError("identities are checked for n >= 4")
    g1, g2 = g3_sequence(tri, n - 1), g3_sequence(tri, n - 2)
    return (
        tri.entry(n, n) - g1,
        tri.entry(n - 1, n) - (g1 + g2),
        tri.entry(n - 2, n) - (g1 + 2 * g2),
    )
