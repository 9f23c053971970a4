"""
Asymptotic constants for prescribed descent sets.

``c_{I,k}`` is the limit of ``d_k(I,n)/f_k(n)`` for a fixed set ``I``. It reduces
to a one-dimensional integral against ``phi_k`` once the last-value counts of
``D_k(I,t)`` are known exactly. ``C_{k,a}`` is the shared limit for ``a``
well-separated descents; it is estimated by stratified Monte Carlo and,
since the integrand factorises into copies of one two-dimensional gap
integral, also by nested quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

import mpmath
import numpy as np
from scipy import integrate

from . import asymptotics as asy
from .errors import NumericalError, ParameterError
from .exact import DescentSpec, build_triangle, count_with_set, f_total, parametrized_count, reverse_set
from .oracle import PatternQuery, enumerate_counts

T_GUARD = 20
DIRECT_CAP = 10
QUAD_TOL = 1e-12
KERNELS = ("flank", "unreflected")


@dataclass(frozen=True)
class ConstantResult:
    value: float
    estimated_error: float
    method: str
    inputs: tuple
    samples: int | None = None
    seed: int | None = None

    def as_dict(self) -> dict:
        k, extra = self.inputs
        out = {"k": k}
        if isinstance(extra, tuple):
            out["I"] = list(extra)
        else:
            out["a"] = extra
        out.update(value=self.value, error=self.estimated_error, method=self.method,
                   samples=self.samples, seed=self.seed)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def _quad(f, lo: float, hi: float, points=None) -> tuple[float, float]:
    val, err = integrate.quad(f, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200, points=points)
    return val, err


def _bernstein_integral(k: int, t: int, last_counts: Sequence[int]) -> tuple[float, float]:
    """
    ``int_0^1 phi_k(x) int_0^x sum_s last_counts[s-1] Phi_s^t(y) dy dx``.

    ``int_0^x Phi_s^t = sum_{j>=s} B_{j,t}(x)``, so the inner sum is the
    Bernstein polynomial with integer weights ``W_j = sum_{s<=j} last_counts[s-1]``.
    """
    weights = [0]
    for c in last_counts:
        weights.append(weights[-1] + c)
    coefs = [comb(t, j) * weights[j] for j in range(t + 1)]
    ev = asy.PhiEvaluator(k)

    def integrand(x: float) -> float:
        poly = sum(c * x ** j * (1 - x) ** (t - j) for j, c in enumerate(coefs) if c)
        return asy.phi(ev, x) * poly

    return _quad(integrand, 0.0, 1.0)


def _finish(k: int, t: int, integral: float, err: float, method: str, I: tuple) -> ConstantResult:
    scale = asy.growth_rate(k).x1 ** t / factorial(t)
    value, error = scale * integral, scale * err
    if error > 1e-7:
        raise NumericalError(f"quadrature error {error:.2e} exceeds 1e-7 for k={k}, I={I}")
    return ConstantResult(value=value, estimated_error=error, method=method, inputs=(k, I))


def last_value_coefficients(k: int, I: Iterable[int]) -> list[int]:
    """``[d_k(r_t(I), t+1-s, t) for s = 1..t]``: members of ``D_k(I,t)`` by last value ``s``."""
    spec = DescentSpec(k, tuple(I))
    t = spec.t
    rev = DescentSpec(k, reverse_set(spec.I, t, k))
    return [parametrized_count(rev, t + 1 - s, t) for s in range(1, t + 1)]


def c_constant_mp(k: int, I: Iterable[int], dps: int = 50):
    """``c_{I,k}`` to ``dps`` digits with mpmath (tanh-sinh quadrature)."""
    spec = DescentSpec(k, tuple(I))
    if not spec.I:
        raise ParameterError("I must be nonempty")
    t = spec.t
    if t > T_GUARD:
        raise ParameterError(f"t = max(I)+k-1 = {t} exceeds the guard {T_GUARD}")
    weights = [0]
    for c in last_value_coefficients(k, spec.I):
        weights.append(weights[-1] + c)
    coefs = [comb(t, j) * weights[j] for j in range(t + 1)]
    x1, _ = asy.growth_rate_mp(k, dps)
    with mpmath.workdps(dps + 10):
        def integrand(x):
            poly = mpmath.fsum(c * x ** j * (1 - x) ** (t - j) for j, c in enumerate(coefs) if c)
            return asy.phi_mp(k, x, x1) * poly

        val = mpmath.quad(integrand, [0, 1]) * x1 ** t / mpmath.factorial(t)
    return val


def c_constant(k: int, I: Iterable[int]) -> ConstantResult:
    """``c_{I,k}`` with exact coefficients and one adaptive quadrature against ``phi_k``."""
    asy._check_k(k)
    spec = DescentSpec(k, tuple(I))
    if not spec.I:
        raise ParameterError("I must be nonempty")
    t = spec.t
    if t > T_GUARD:
        raise ParameterError(f"t = max(I)+k-1 = {t} exceeds the guard {T_GUARD}")
    val, err = _bernstein_integral(k, t, last_value_coefficients(k, spec.I))
    return _finish(k, t, val, err, "adaptive_nested", spec.I)


def dasy_integral_direct(k: int, I: Iterable[int]) -> ConstantResult:
    """Same constant, summing over every member of ``D_k(I,t)`` found by enumeration."""
    asy._check_k(k)
    spec = DescentSpec(k, tuple(I))
    if not spec.I:
        raise ParameterError("I must be nonempty")
    t = spec.t
    if t > DIRECT_CAP:
        raise ParameterError(f"t = {t} exceeds the enumeration cap {DIRECT_CAP}")
    report = enumerate_counts(PatternQuery.kdescent(k, t, "by_set_and_first_and_last"), cap=DIRECT_CAP)
    by_last = [0] * t
    for (J, _first, last), c in report.counts.items():
        if J == spec.I:
            by_last[last - 1] += c
    val, err = _bernstein_integral(k, t, by_last)
    return _finish(k, t, val, err, "adaptive_nested", spec.I)


@dataclass(frozen=True)
class DuduRow:
    i: int
    c: float
    ratio_to_next: float | None


def dudu_ratios(k: int = 3, max_i: int = 4) -> list[DuduRow]:
    """``c_{{i},k}`` for ``i = 1..max_i`` and successive ratios ``c_{{i}}/c_{{i+1}}``."""
    if max_i < 2:
        raise ParameterError("max_i must be >= 2")
    cs = [c_constant(k, (i,)).value for i in range(1, max_i + 1)]
    return [
        DuduRow(i=i + 1, c=c, ratio_to_next=(c / cs[i + 1] if i + 1 < len(cs) else None))
        for i, c in enumerate(cs)
    ]


# -- equidistribution constant ----------------------------------------------

def _kernel(k: int, kind: str, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Gap kernel between a block ending at height ``y`` and the next starting at ``x``."""
    over = np.where(y > x, np.clip(y - x, 0.0, None) ** k, 0.0)
    if kind == "flank":
        return 1 - y ** k - (1 - x) ** k + over
    if kind == "unreflected":
        return 1 - y ** k - x ** k + over
    raise ParameterError(f"kernel must be one of {KERNELS}")


def gap_integral(k: int, kernel: str = "flank") -> tuple[float, float]:
    """``int int phi_k(1-y) K(y,x) phi_k(x) dy dx`` by nested quadrature split at the kink."""
    if kernel not in KERNELS:
        raise ParameterError(f"kernel must be one of {KERNELS}")
    ev = asy.PhiEvaluator(k)
    errs = []

    def inner(x: float) -> float:
        f = lambda y: asy.phi(ev, 1.0 - y) * float(_kernel(k, kernel, np.float64(y), np.float64(x)))
        a, ea = _quad(f, 0.0, x) if x > 0 else (0.0, 0.0)
        b, eb = _quad(f, x, 1.0) if x < 1 else (0.0, 0.0)
        errs.append(ea + eb)
        return a + b

    val, err = _quad(lambda x: asy.phi(ev, x) * inner(x), 0.0, 1.0)
    return val, err + max(errs, default=0.0)


def _mc_replicate(k: int, a: int, n: int, rng: np.random.Generator, kernel: str) -> float:
    xs = rng.random((a + 1, n))
    # Latin-hypercube stratification of every y coordinate
    ys = np.stack([(rng.permutation(n) + rng.random(n)) / n for _ in range(a + 1)])
    val = asy.phi_array(k, xs[0]) * asy.phi_array(k, 1.0 - ys[a])
    for j in range(a):
        val = val * asy.phi_array(k, 1.0 - ys[j]) * _kernel(k, kernel, ys[j], xs[j + 1]) * asy.phi_array(k, xs[j + 1])
    return float(val.mean())


@dataclass(frozen=True)
class EquidistResult:
    k: int
    a: int
    monte_carlo: ConstantResult
    quadrature: ConstantResult
    kernel: str

    @property
    def agree(self) -> bool:
        gap = abs(self.monte_carlo.value - self.quadrature.value)
        return gap <= 3 * math.hypot(self.monte_carlo.estimated_error, self.quadrature.estimated_error)

    def predicted_ratio(self, convention: str) -> float:
        """Predicted ``lim d_k(I,n)/f_k(n)`` under a prefactor convention."""
        g = asy.growth_rate(self.k)
        value = self.quadrature.value
        if convention == "single_factorial":
            denom = factorial(self.k)
        elif convention == "power_factorial":
            denom = factorial(self.k) ** self.a
        else:
            raise ParameterError("convention must be single_factorial or power_factorial")
        return g.c_k ** self.a / (denom * g.r_k ** (self.a * self.k)) * value

    def as_dict(self) -> dict:
        return {
            "k": self.k, "a": self.a, "kernel": self.kernel,
            "monte_carlo": self.monte_carlo.as_dict(),
            "quadrature": self.quadrature.as_dict(),
            "agree": self.agree,
            "predicted_ratio_single_factorial": self.predicted_ratio("single_factorial"),
            "predicted_ratio_power_factorial": self.predicted_ratio("power_factorial"),
        }


def equidist_constant(
    k: int, a: int, samples: int = 100_000, seed: int = 0,
    kernel: str = "flank", replicates: int = 16,
) -> EquidistResult:
    """
    ``C_{k,a}``, the integral over ``2(a+1)`` block-boundary heights of the product
    of first/last-element densities and ``a`` gap kernels.

    ``a = 0`` is the empty product, 1. Monte Carlo uses ``replicates``
    independent Latin-hypercube batches seeded by ``(seed, replicate)``; the
    standard error comes from their spread.
    """
    asy._check_k(k)
    if a < 0:
        raise ParameterError("a must be >= 0")
    if kernel not in KERNELS:
        raise ParameterError(f"kernel must be one of {KERNELS}")
    if a == 0:
        one = ConstantResult(1.0, 0.0, "monte_carlo", (k, 0), samples, seed)
        return EquidistResult(k, 0, one, ConstantResult(1.0, 0.0, "adaptive_nested", (k, 0)), kernel)
    if samples < 100_000:
        raise ParameterError("samples must be >= 1e5")
    if replicates < 2:
        raise ParameterError("replicates must be >= 2")
    per = samples // replicates
    means = np.array([
        _mc_replicate(k, a, per, np.random.default_rng([seed, r]), kernel) for r in range(replicates)
    ])
    mc = ConstantResult(
        value=float(means.mean()),
        estimated_error=float(means.std(ddof=1) / math.sqrt(replicates)),
        method="monte_carlo", inputs=(k, a), samples=per * replicates, seed=seed,
    )
    # the integrand factorises: two end densities times a copies of one gap integral
    ev = asy.PhiEvaluator(k)
    left, e1 = _quad(lambda x: asy.phi(ev, x), 0.0, 1.0)
    right, e2 = _quad(lambda y: asy.phi(ev, 1.0 - y), 0.0, 1.0)
    mid, e3 = gap_integral(k, kernel)
    quad = ConstantResult(
        value=left * mid ** a * right, estimated_error=e1 + e2 + a * mid ** (a - 1) * e3,
        method="adaptive_nested", inputs=(k, a),
    )
    return EquidistResult(k, a, mc, quad, kernel)


def spaced_set(n: int, a: int) -> tuple[int, ...]:
    """``a`` descent positions spread evenly through ``[n]``."""
    return tuple(round(n * (j + 1) / (a + 1)) for j in range(a))


@dataclass(frozen=True)
class PrefactorCheck:
    n: int
    I: tuple[int, ...]
    exact_ratio: float
    single_factorial: float
    power_factorial: float

    @property
    def closer(self) -> str:
        ds = abs(self.single_factorial / self.exact_ratio - 1)
        dp = abs(self.power_factorial / self.exact_ratio - 1)
        return "single_factorial" if ds < dp else "power_factorial"


def prefactor_check(result: EquidistResult, n: int, I: Sequence[int] | None = None) -> PrefactorCheck:
    """Compare both prefactor conventions with the exact ``d_k(I,n)/f_k(n)``."""
    I = tuple(I) if I is not None else spaced_set(n, result.a)
    tri = build_triangle(result.k, n)
    ratio = Fraction(count_with_set(DescentSpec(result.k, I), n), f_total(tri, n))
    return PrefactorCheck(
        n=n, I=I, exact_ratio=float(ratio),
        single_factorial=result.predicted_ratio("single_factorial"),
        power_factorial=result.predicted_ratio("power_factorial"),
    )


# -- convergence ---------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    ratio_exact: object  # mpmath.mpf
    constant: object
    rel_gap: object


@dataclass
class ConvergenceTable:
    k: int
    I: tuple[int, ...]
    rows: list[ConvergenceRow] = field(default_factory=list)

    def gaps_decreasing(self) -> bool:
        gaps = [r.rel_gap for r in self.rows]
        return all(b < a for a, b in zip(gaps, gaps[1:]))

    def to_csv(self) -> str:
        lines = ["n,ratio_exact,constant,rel_gap"]
        lines += [
            f"{r.n},{mpmath.nstr(r.ratio_exact, 20)},{mpmath.nstr(r.constant, 20)},{mpmath.nstr(r.rel_gap, 6)}"
            for r in self.rows
        ]
        return "\n".join(lines) + "\n"


def convergence_report(k: int, I: Iterable[int], n_list: Sequence[int], dps: int | None = None) -> ConvergenceTable:
    """
    Exact ``d_k(I,n)/f_k(n)`` against ``c_{I,k}`` for each ``n`` in ``n_list``.

    The gap shrinks geometrically, so double precision bottoms out near n=60;
    everything here runs in mpmath at ``dps`` digits (default scales with n).
    """
    spec = DescentSpec(k, tuple(I))
    if not n_list or min(n_list) < spec.t:
        raise ParameterError(f"every n must be >= t = {spec.t}")
    dps = dps or 30 + max(n_list) // 2
    c = c_constant_mp(k, spec.I, dps)
    tri = build_triangle(k, max(n_list))
    table = ConvergenceTable(k, spec.I)
    with mpmath.workdps(dps):
        for n in n_list:
            ratio = mpmath.mpf(count_with_set(spec, n)) / f_total(tri, n)
            table.rows.append(ConvergenceRow(n, ratio, c, abs(ratio - c) / c))
    return table
