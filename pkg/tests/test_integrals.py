import math

import mpmath
import pytest

from kdescent import integrals as ig
from kdescent import asymptotics as asy
from kdescent.errors import ParameterError
from kdescent.exact import DescentSpec, count_with_set


def test_coefficients_for_single_descent():
    assert ig.last_value_coefficients(3, (1,)) == [1, 0, 0]
    # every member of D_3({2},4) ends in 1 or 2
    assert sum(ig.last_value_coefficients(3, (2,))) == count_with_set(DescentSpec(3, (2,)), 4)


def test_single_descent_constant_by_hand():
    x1 = asy.growth_rate(3).x1
    ev = asy.PhiEvaluator(3)
    from scipy import integrate

    val, _ = integrate.quad(lambda x: asy.phi(ev, x) * (1 - (1 - x) ** 3), 0, 1, epsabs=1e-13)
    res = ig.c_constant(3, (1,))
    assert res.value == pytest.approx(x1 ** 3 / 6 * val, rel=1e-12)
    assert res.estimated_error <= 1e-7
    assert res.method == "adaptive_nested"


@pytest.mark.parametrize("k,I", [(3, (1,)), (3, (2,)), (4, (1,)), (3, (1, 4))])
def test_direct_sum_agrees(k, I):
    assert abs(ig.c_constant(k, I).value - ig.dasy_integral_direct(k, I).value) <= 1e-9


def test_dudu_ratios_and_signs():
    rows = ig.dudu_ratios(3, 4)
    r = [row.ratio_to_next for row in rows[:3]]
    assert r[0] == pytest.approx(1.132101, abs=1e-6)
    assert r[1] == pytest.approx(0.826993, abs=1e-6)
    # the third limit, confirmed by exact counts below
    assert r[2] == pytest.approx(1.053244, abs=1e-6)
    c = [row.c for row in rows]
    assert c[0] > c[1] < c[2] > c[3]


def test_constants_match_exact_count_ratios():
    n = 120
    counts = [count_with_set(DescentSpec(3, (i,)), n) for i in range(1, 5)]
    rows = ig.dudu_ratios(3, 4)
    for i in range(3):
        exact = float(mpmath.mpf(counts[i]) / counts[i + 1])
        assert rows[i].ratio_to_next == pytest.approx(exact, abs=1e-12)


def test_guards():
    with pytest.raises(ParameterError):
        ig.c_constant(3, ())
    with pytest.raises(ParameterError):
        ig.c_constant(3, (19,))
    with pytest.raises(ParameterError):
        ig.dasy_integral_direct(3, (9,))


@pytest.mark.parametrize("I", [(1,), (2,)])
def test_convergence_gaps_shrink(I):
    table = ig.convergence_report(3, I, [50, 100, 200, 400])
    assert table.gaps_decreasing()
    assert table.rows[-1].rel_gap < 1e-100
    assert table.to_csv().splitlines()[0] == "n,ratio_exact,constant,rel_gap"


def test_high_precision_constant_matches_double():
    assert float(ig.c_constant_mp(3, (2,), 30)) == pytest.approx(ig.c_constant(3, (2,)).value, rel=1e-13)


def test_equidistribution_at_400():
    counts = {i: count_with_set(DescentSpec(3, (i,)), 400) for i in (50, 200, 350)}
    for i in counts:
        for j in counts:
            assert 0.9 <= counts[i] / counts[j] <= 1.1
    assert 0.9 <= counts[50] / counts[350] <= 1.1


def test_equidist_constant_a1():
    res = ig.equidist_constant(3, 1, samples=200_000, seed=3)
    assert 0 < res.quadrature.value <= 1
    assert res.agree
    again = ig.equidist_constant(3, 1, samples=200_000, seed=3)
    assert again.monte_carlo == res.monte_carlo


def test_equidist_zero_descents():
    res = ig.equidist_constant(3, 0)
    assert res.monte_carlo.value == res.quadrature.value == 1


def test_flank_kernel_predicts_exact_ratio():
    res = ig.equidist_constant(3, 1, samples=100_000)
    chk = ig.prefactor_check(res, 400, (200,))
    assert chk.power_factorial == pytest.approx(chk.exact_ratio, rel=1e-9)
    other = ig.equidist_constant(3, 1, samples=100_000, kernel="unreflected")
    assert abs(ig.prefactor_check(other, 400, (200,)).power_factorial / chk.exact_ratio - 1) > 0.1


def test_prefactor_for_two_descents():
    res = ig.equidist_constant(3, 2, samples=100_000)
    chk = ig.prefactor_check(res, 400)
    assert chk.I == (133, 267)
    assert chk.closer == "power_factorial"
    assert chk.power_factorial == pytest.approx(chk.exact_ratio, rel=1e-6)
    assert abs(res.monte_carlo.value - res.quadrature.value) <= 4 * res.monte_carlo.estimated_error


def test_equidist_parameter_checks():
    with pytest.raises(ParameterError):
        ig.equidist_constant(3, 1, samples=1000)
    with pytest.raises(ParameterError):
        ig.equidist_constant(3, -1)
    with pytest.raises(ParameterError):
        ig.equidist_constant(3, 1, kernel="other")


def test_result_json():
    d = ig.c_constant(3, (2,)).as_dict()
    assert d["I"] == [2] and d["method"] == "adaptive_nested"
    e = ig.equidist_constant(3, 1, samples=100_000, seed=5).monte_carlo.as_dict()
    assert e["a"] == 1 and e["seed"] == 5 and e["samples"] == 100_000
