"""
Exact bivariate power series truncated at a total degree, used to check the
k=3 generating-function identity

    T(x,y) (x^3 y^3 - (1-x)^3) = P F(y) + Q G(xy) + R

with ``T = sum f_3(m,n) x^m y^n`` (zero for m > n), ``F = sum f_3(n) y^n`` and
``G = sum g_3(n) z^n``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError
from .exact import CountTriangle, build_triangle, f_total, g3_sequence

SAFE_MARGIN = 4


@dataclass(frozen=True)
class TruncatedSeries2D:
    """Coefficients ``c(i,j)`` for ``i + j <= cap``, stored as a dense triangular array."""

    cap: int
    rows: tuple[tuple[int, ...], ...]  # rows[d][i] = c(i, d - i)

    @classmethod
    def zero(cls, cap: int) -> "TruncatedSeries2D":
        if cap < 0:
            raise ParameterError("cap must be >= 0")
        return cls(cap, tuple(tuple([0] * (d + 1)) for d in range(cap + 1)))

    @classmethod
    def from_dict(cls, cap: int, coeffs: dict[tuple[int, int], int]) -> "TruncatedSeries2D":
        """Terms beyond the cap are dropped."""
        rows = [[0] * (d + 1) for d in range(cap + 1)]
        for (i, j), c in coeffs.items():
            if i < 0 or j < 0:
                raise ParameterError("exponents must be >= 0")
            if i + j <= cap:
                rows[i + j][i] += c
        return cls(cap, tuple(tuple(r) for r in rows))

    def coeff(self, i: int, j: int) -> int:
        if i < 0 or j < 0 or i + j > self.cap:
            raise ParameterError(f"({i},{j}) outside the cap {self.cap}")
        return self.rows[i + j][i]

    def items(self):
        for d, row in enumerate(self.rows):
            for i, c in enumerate(row):
                if c:
                    yield (i, d - i), c

    def _check(self, other: "TruncatedSeries2D") -> None:
        if self.cap != other.cap:
            raise ParameterError("caps differ")

    def __add__(self, other: "TruncatedSeries2D") -> "TruncatedSeries2D":
        self._check(other)
        return TruncatedSeries2D(self.cap, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)
        ))

    def __neg__(self) -> "TruncatedSeries2D":
        return TruncatedSeries2D(self.cap, tuple(tuple(-a for a in r) for r in self.rows))

    def __sub__(self, other: "TruncatedSeries2D") -> "TruncatedSeries2D":
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries2D") -> "TruncatedSeries2D":
        self._check(other)
        cap = self.cap
        out = [[0] * (d + 1) for d in range(cap + 1)]
        right = list(other.items())
        for (i, j), a in self.items():
            room = cap - i - j
            for (p, q), b in right:
                if p + q <= room:
                    out[i + j + p + q][i + p] += a * b
        return TruncatedSeries2D(cap, tuple(tuple(r) for r in out))

    def max_abs(self, max_degree: int) -> int:
        return max((abs(c) for d in range(min(max_degree, self.cap) + 1) for c in self.rows[d]), default=0)

    def nonzero_locations(self, max_degree: int) -> list[tuple[int, int]]:
        return [(i, j) for (i, j), _ in self.items() if i + j <= max_degree]

    def to_csv(self) -> str:
        lines = ["i,j,coefficient"]
        for d, row in enumerate(self.rows):
            lines += [f"{i},{d - i},{c}" for i, c in enumerate(row)]
        return "\n".join(lines) + "\n"


def poly(cap: int, terms: dict[tuple[int, int], int]) -> TruncatedSeries2D:
    return TruncatedSeries2D.from_dict(cap, terms)


@dataclass(frozen=True)
class SeriesBundle:
    T: TruncatedSeries2D
    F: TruncatedSeries2D  # in y
    G: TruncatedSeries2D  # already substituted z = xy


def build_series(tri: CountTriangle, N: int) -> SeriesBundle:
    """``T``, ``F`` and ``G(xy)`` truncated at total degree ``N``."""
    if tri.k != 3:
        raise ParameterError("the identity is for k=3")
    # T needs rows up to n <= N - 1 (m >= 1); G(xy) needs g_3(n) for 2n <= N
    need = max(N - 1, N // 2 + 1)
    if tri.max_n < need:
        raise ParameterError(f"triangle covers n <= {tri.max_n}, need {need}")
    T = {(m, n): tri.entry(m, n) for n in range(1, N) for m in range(1, n + 1) if m + n <= N}
    F = {(0, n): f_total(tri, n) for n in range(1, N + 1) if n <= tri.max_n}
    G = {(n, n): g3_sequence(tri, n) for n in range(1, N // 2 + 1)}
    return SeriesBundle(poly(N, T), poly(N, F), poly(N, G))


def identity_polynomials(N: int) -> tuple[TruncatedSeries2D, TruncatedSeries2D, TruncatedSeries2D, TruncatedSeries2D]:
    """``(multiplier, P, Q, R)`` with multiplier ``x^3 y^3 - (1-x)^3``."""
    # (1-x)^2 = 1 - 2x + x^2, (1-x)^3 = 1 - 3x + 3x^2 - x^3
    mult = poly(N, {(3, 3): 1, (0, 0): -1, (1, 0): 3, (2, 0): -3, (3, 0): 1})
    # P = xy (x^2 y^2 - (1-x)^2)
    P = poly(N, {(3, 3): 1, (1, 1): -1, (2, 1): 2, (3, 1): -1})
    # Q = (x-1) x^2 y (xy + x - 1) = x^2 y (x^2 y + x^2 - 2x - xy + 1)
    Q = poly(N, {(4, 2): 1, (4, 1): 1, (3, 1): -2, (3, 2): -1, (2, 1): 1})
    # R = (x-1) x y ((x-1)^2 - x^2 y^2)
    R = poly(N, {(4, 1): 1, (3, 1): -3, (2, 1): 3, (1, 1): -1, (4, 3): -1, (3, 3): 1})
    return mult, P, Q, R


@dataclass(frozen=True)
class IdentityCheck:
    cap: int
    safe_degree: int
    max_residual: int
    nonzero: list[tuple[int, int]]
    residual: TruncatedSeries2D


def identity_residual(N: int, tri: CountTriangle | None = None) -> IdentityCheck:
    if N < 8:
        raise ParameterError("cap must be >= 8")
    tri = tri or build_triangle(3, N)
    s = build_series(tri, N)
    mult, P, Q, R = identity_polynomials(N)
    res = s.T * mult - (P * s.F + Q * s.G + R)
    safe = N - SAFE_MARGIN
    return IdentityCheck(N, safe, res.max_abs(safe), res.nonzero_locations(safe), res)


def verify_gen_identity(N: int) -> int:
    """Largest ``|coefficient|`` of LHS - RHS over total degree ``<= N - 4``."""
    return identity_residual(N).max_residual
