"""
Analytic side: growth constants, the first-element density, order statistics
and the gap kernel used by the equidistribution constant.

With ``D(x) = sum_l x^{kl}/(kl)! - x^{kl+1}/(kl+1)!`` (reciprocal of the
e.g.f. of k-descent-free permutations), ``f_k(n) ~ n! c_k r_k^n`` where
``1/r_k`` is the smallest positive zero ``x1`` of ``D`` and
``c_k = -1/(x1 D'(x1))``. The limiting density of ``w(1)/n`` is
``phi_k(x) = -D'(x/r_k)/r_k``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy import integrate, optimize

from .errors import NumericalError, ParameterError

_REL_STOP = 1e-16


def _check_k(k: int, lo: int = 3) -> None:
    if not isinstance(k, int) or k < lo:
        raise ParameterError(f"k must be an integer >= {lo}, got {k!r}")


def _signed_series(u: float, k: int, shift: int = 0) -> float:
    """
    ``sum_l sign(l) u^{l-shift}/(l-shift)!`` over ``l >= shift`` with
    ``l = 0 mod k`` (+) and ``l = -1 mod k`` (-).

    ``shift=0`` gives ``-D'(u)``; shifting by ``j`` differentiates ``j`` times in ``u``.
    """
    total = 0.0
    biggest = 0.0
    for base in range(0, 10_000, k):
        for ell, sign in ((base - 1, -1.0), (base, 1.0)):
            p = ell - shift
            if ell < 0 or p < 0:
                continue
            term = sign * u ** p / factorial(p)
            total += term
            biggest = max(biggest, abs(total))
        p_next = base + k - 1 - shift
        if p_next > 0 and u ** p_next / factorial(p_next) < _REL_STOP * max(biggest, 1e-300):
            break
    return total


def denominator(k: int, x: float) -> float:
    """``D(x) = sum_{l>=0} x^{kl}/(kl)! - x^{kl+1}/(kl+1)!``, summed in pairs."""
    _check_k(k)
    if x < 0:
        raise ParameterError("x must be >= 0")
    total = 0.0
    ell = 0
    while True:
        a = x ** ell / factorial(ell)
        b = x ** (ell + 1) / factorial(ell + 1)
        # the l=0 pair is 1 - x, exact in floating point near the root
        pair = (1.0 - x) if ell == 0 else (a - b)
        total += pair
        if ell > 0 and a < _REL_STOP * max(abs(total), 1e-300):
            break
        ell += k
    return total


def denominator_prime(k: int, x: float) -> float:
    """Term-wise derivative of :func:`denominator`."""
    _check_k(k)
    return -_signed_series(x, k)


def warlimont_bounds(k: int) -> tuple[float, float]:
    """Interval known to contain ``1/r_k`` for ``k >= 4``."""
    if k < 4:
        raise ParameterError("the bracket is stated for k >= 4")
    kf = factorial(k)
    g = Fraction(kf + 1, factorial(k + 1) + 1)
    h = Fraction(2 * (k + 1), kf - 2 * (k + 1))
    return float(1 + (1 - g) / kf), float(1 + (1 + h) / kf)


@dataclass(frozen=True)
class GrowthProfile:
    k: int
    x1: float
    r_k: float
    c_k: float
    gamma_hint: float | None = None

    def as_dict(self) -> dict:
        lo, hi = warlimont_bounds(self.k) if self.k >= 4 else (None, None)
        return {
            "k": self.k, "x1": self.x1, "r_k": self.r_k, "c_k": self.c_k,
            "warlimont_lower": lo, "warlimont_upper": hi,
        }


@lru_cache(maxsize=None)
def growth_rate(k: int, tol: float = 1e-15) -> GrowthProfile:
    """Locate ``x1 = 1/r_k`` by Brent's method inside a known bracket."""
    _check_k(k)
    if tol < 1e-15:
        raise ParameterError("tol must be >= 1e-15")
    if k == 3:
        lo, hi = 1.0, 1.5
    else:
        lo, hi = warlimont_bounds(k)
        # pad by a few ulps; for large k the bracket is ~1e-9 wide
        lo, hi = lo - 1e-13, hi + 1e-13
    f_lo, f_hi = denominator(k, lo), denominator(k, hi)
    if f_lo * f_hi > 0:
        raise NumericalError(f"no sign change of D on [{lo}, {hi}] for k={k}")
    x1 = optimize.brentq(lambda x: denominator(k, x), lo, hi, xtol=tol, rtol=8.9e-16, maxiter=500)
    c_k = -1.0 / (x1 * denominator_prime(k, x1))
    return GrowthProfile(k=k, x1=x1, r_k=1.0 / x1, c_k=c_k, gamma_hint=0.5 if k == 3 else None)


def c3_closed_form() -> float:
    s = 3 * math.sqrt(3)
    return s / (2 * math.pi) * math.exp(math.pi / s)


PHI_MODES = ("series", "roots_of_unity", "closed_form_k3")


@dataclass(frozen=True)
class PhiEvaluator:
    """Evaluates ``phi_k`` on ``[0, 1]`` in one of three equivalent ways."""

    k: int
    mode: str = "series"

    def __post_init__(self):
        _check_k(self.k)
        if self.mode not in PHI_MODES:
            raise ParameterError(f"mode must be one of {PHI_MODES}")
        if self.mode == "closed_form_k3" and self.k != 3:
            raise ParameterError("closed form exists only for k=3")

    @property
    def r_k(self) -> float:
        return growth_rate(self.k).r_k

    def __call__(self, x: float) -> float:
        return phi(self, x)


def phi(evaluator: PhiEvaluator, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"x must lie in [0, 1], got {x}")
    k = evaluator.k
    x1 = growth_rate(k).x1
    if evaluator.mode == "series":
        return x1 * _signed_series(x * x1, k)
    if evaluator.mode == "roots_of_unity":
        total = 0j
        for j in range(1, k):
            w = cmath.exp(2j * math.pi * j / k)
            total += (1 - w) * cmath.exp(w * x * x1)
        return (x1 / k * total).real
    s = 3 * math.sqrt(3)
    return 4 * math.pi / 9 * math.exp(-math.pi * x / s) * math.sin((x + 1) * math.pi / 3)


def phi_derivative(k: int, x: float, order: int) -> float:
    """``d^order phi_k / dx^order`` from the term-wise differentiated series."""
    x1 = growth_rate(k).x1
    return x1 ** (order + 1) * _signed_series(x * x1, k, shift=order)


def phi_vector(k: int, xs) -> np.ndarray:
    ev = PhiEvaluator(k)
    return np.array([phi(ev, float(x)) for x in np.asarray(xs, dtype=float)])


def phi_array(k: int, xs) -> np.ndarray:
    """Vectorised ``phi_k`` via the finite roots-of-unity sum (no domain check)."""
    x1 = growth_rate(k).x1
    u = np.asarray(xs, dtype=float) * x1
    w = np.exp(2j * np.pi * np.arange(1, k) / k)
    total = ((1 - w) * np.exp(np.multiply.outer(u, w))).sum(axis=-1)
    return x1 / k * total.real


def phi_curve_csv(k: int, grid: int) -> str:
    if grid < 2:
        raise ParameterError("grid must have at least 2 points")
    xs = np.linspace(0.0, 1.0, grid)
    lines = ["x,phi"] + [f"{x:.12g},{v:.17g}" for x, v in zip(xs, phi_vector(k, xs))]
    return "\n".join(lines) + "\n"


def phi_diagnostics(k: int, grid: int = 1000) -> dict:
    """Residuals of the ODE, boundary conditions and normalisation of ``phi_k``."""
    _check_k(k)
    x1 = growth_rate(k).x1
    xs = np.linspace(0.0, 1.0, grid)
    vals = phi_vector(k, xs)
    dk = np.array([phi_derivative(k, float(x), k) for x in xs])
    ode_inv = float(np.max(np.abs(dk - x1 ** k * vals)))      # d^k phi = r^{-k} phi
    ode_pow = float(np.max(np.abs(dk - x1 ** -k * vals)))     # d^k phi = r^{k} phi
    boundary_zero = [phi_derivative(k, 0.0, j) for j in range(1, k - 1)]
    boundary_one = phi_derivative(k, 1.0, k - 1)
    integral, err = integrate.quad(lambda x: phi(PhiEvaluator(k), x), 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    sup_dev = {
        kk: float(np.max(np.abs(phi_vector(kk, np.linspace(0, 1, 201)) - 1.0)))
        for kk in range(3, 11)
    }
    return {
        "k": k,
        "ode_residual_r_inv_k": ode_inv,
        "ode_residual_r_k": ode_pow,
        "derivatives_at_0": boundary_zero,
        "derivative_k_minus_1_at_1": boundary_one,
        "integral": integral,
        "integral_error": err,
        "sup_abs_phi_minus_1": sup_dev,
    }


# -- order statistics --------------------------------------------------------

def order_stat_density(t: int, s: int, y: float) -> float:
    """Density of the ``s``-th smallest of ``t`` independent uniforms on ``[0, 1]``."""
    if not 1 <= s <= t:
        raise ParameterError(f"need 1 <= s <= t, got s={s}, t={t}")
    if not 0.0 <= y <= 1.0:
        raise ParameterError(f"y must lie in [0, 1], got {y}")
    coef = factorial(t) // (factorial(s - 1) * factorial(t - s))
    return coef * y ** (s - 1) * (1 - y) ** (t - s)


def order_stat_cdf(t: int, s: int, x: float) -> float:
    """``int_0^x`` of :func:`order_stat_density`: ``P(Binomial(t, x) >= s)``."""
    return sum(comb(t, j) * x ** j * (1 - x) ** (t - j) for j in range(s, t + 1))


@dataclass(frozen=True)
class OrderStatSpec:
    n: int
    t: int
    s: int

    def __post_init__(self):
        if not 1 <= self.s <= self.t <= self.n:
            raise ParameterError(f"need 1 <= s <= t <= n, got {self}")


@dataclass(frozen=True)
class DiscreteOrderStat:
    pmf: dict[int, Fraction]
    mean: Fraction
    variance: Fraction

    @staticmethod
    def mean_formula(spec: OrderStatSpec) -> Fraction:
        return Fraction(spec.s * (spec.n + 1), spec.t + 1)

    @staticmethod
    def variance_formula(spec: OrderStatSpec) -> Fraction:
        n, t, s = spec.n, spec.t, spec.s
        return Fraction(s * (t - s + 1) * (n + 1) * (n - t), (t + 1) ** 2 * (t + 2))


def discrete_order_stat(spec: OrderStatSpec) -> DiscreteOrderStat:
    """
    Exact law of the ``s``-th smallest element of a uniform ``t``-subset of ``[n]``.

    Mean and variance are summed directly from the pmf, not from closed forms.
    """
    n, t, s = spec.n, spec.t, spec.s
    total = comb(n, t)
    pmf = {
        ell: Fraction(comb(ell - 1, s - 1) * comb(n - ell, t - s), total)
        for ell in range(s, n - t + s + 1)
    }
    mean = sum((ell * p for ell, p in pmf.items()), Fraction(0))
    second = sum((ell * ell * p for ell, p in pmf.items()), Fraction(0))
    return DiscreteOrderStat(pmf=pmf, mean=mean, variance=second - mean * mean)


# -- gap kernel --------------------------------------------------------------

def _check_unit(*vals: float) -> None:
    for v in vals:
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"arguments must lie in [0, 1], got {v}")


def theta(k: int, x: float, y: float) -> float:
    """``1 - x^k - y^k + [x > y] (x - y)^k`` (indicator strict)."""
    _check_unit(x, y)
    return 1 - x ** k - y ** k + ((x - y) ** k if x > y else 0.0)


def theta_flank(k: int, x: float, y: float) -> float:
    """
    Limit of ``P(max > x n and min <= y n)`` for a uniform ``k``-subset of ``[n]``:
    ``1 - x^k - (1-y)^k + [x > y] (x - y)^k``.

    This is the probability that a k-descent block whose neighbours sit at
    relative heights ``x`` (left) and ``y`` (right) is flanked by ascents.
    """
    _check_unit(x, y)
    return 1 - x ** k - (1 - y) ** k + ((x - y) ** k if x > y else 0.0)


def theta_exact(k: int, n: int, l1: int, l2: int) -> Fraction:
    """``P(max > l2 and min <= l1)`` for a uniform ``k``-subset of ``[n]``, exactly."""
    if not (0 <= l1 <= n and 0 <= l2 <= n and 1 <= k <= n):
        raise ParameterError("need 0 <= l1, l2 <= n and 1 <= k <= n")
    total = comb(n, k)
    good = total - comb(l2, k) - comb(n - l1, k) + (comb(l2 - l1, k) if l2 > l1 else 0)
    return Fraction(good, total)


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    exact: float
    theta_flank: float
    theta_unreflected: float


def theta_mc_check(k: int, n: int, l1: int, l2: int, samples: int = 100_000, seed: int = 0) -> MCEstimate:
    """Monte Carlo over uniform ``k``-subsets of ``[n]``, compared with the exact count."""
    exact = theta_exact(k, n, l1, l2)
    rng = np.random.default_rng(seed)
    # k smallest of n random keys -> a uniform k-subset
    keys = rng.random((samples, n))
    picks = np.argpartition(keys, k - 1, axis=1)[:, :k] + 1
    hit = (picks.max(axis=1) > l2) & (picks.min(axis=1) <= l1)
    p = hit.mean()
    return MCEstimate(
        estimate=float(p),
        stderr=float(math.sqrt(max(p * (1 - p), 0.0) / samples)),
        exact=float(exact),
        theta_flank=theta_flank(k, l2 / n, l1 / n),
        theta_unreflected=theta(k, l2 / n, l1 / n),
    )


# -- high precision ------------------------------------------------------------

def growth_rate_mp(k: int, dps: int):
    """``(x1, c_k)`` as mpmath numbers carried to ``dps`` digits, polished from the float root."""
    import mpmath

    _check_k(k)
    with mpmath.workdps(dps + 10):
        def D(x):
            return mpmath.fsum(
                x ** ell / mpmath.factorial(ell) - x ** (ell + 1) / mpmath.factorial(ell + 1)
                for ell in range(0, 4 * dps + 40, k)
            )

        def dD(x):
            return mpmath.fsum(
                (x ** (ell - 1) / mpmath.factorial(ell - 1) if ell else 0) - x ** ell / mpmath.factorial(ell)
                for ell in range(0, 4 * dps + 40, k)
            )

        x1 = mpmath.findroot(D, mpmath.mpf(growth_rate(k).x1), df=dD, solver="newton")
        c_k = -1 / (x1 * dD(x1))
    return x1, c_k


def phi_mp(k: int, x, x1):
    """``phi_k`` in mpmath arithmetic through the roots-of-unity sum."""
    import mpmath

    total = mpmath.mpc(0)
    for j in range(1, k):
        w = mpmath.expjpi(mpmath.mpf(2 * j) / k)
        total += (1 - w) * mpmath.exp(w * x * x1)
    return x1 / k * total.real
