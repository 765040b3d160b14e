#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

import math

import numpy as np
import pytest

from grouptest import exceptions, theory

LN2 = math.log(2)


@pytest.mark.parametrize("num_items,num_defectives,expected,tolerance", [
    (4, 2, math.log2(6), 1e-12),
    (500, 10, 67.91, 0.01),
    (10, 0, 0.0, 1e-12),
    (10, 10, 0.0, 1e-12),
])
def test_log2_binomial(num_items, num_defectives, expected, tolerance):
    assert abs(theory.log2_binomial(num_items, num_defectives) - expected) < tolerance


@pytest.mark.parametrize("num_items,num_defectives", [(500, 10), (1000, 100), (60, 30)])
def test_log2_binomial_lgamma_matches_exact(num_items, num_defectives):
    exact = theory.log2_binomial_exact(num_items, num_defectives)
    approx = theory.log2_binomial_lgamma(num_items, num_defectives)
    assert abs(exact - approx) < 1e-8


def test_log2_binomial_large():
    # above the exact limit the log-gamma route is used
    value = theory.log2_binomial(10000, 10)
    assert abs(value - theory.log2_binomial_exact(10000, 10)) < 1e-8


@pytest.mark.parametrize("num_items,num_defectives", [(3, 4), (-1, 0), (5, -1)])
def test_log2_binomial_errors(num_items, num_defectives):
    pytest.raises(exceptions.ParameterError, theory.log2_binomial, num_items, num_defectives)


@pytest.mark.parametrize("args,expected,tolerance", [
    ((4, 2, 1), math.log2(6), 1e-9),
    ((500, 10, 136), 0.4994, 1e-3),
])
def test_rate(args, expected, tolerance):
    assert abs(theory.rate(*args) - expected) < tolerance


def test_rate_needs_a_test():
    pytest.raises(exceptions.ParameterError, theory.rate, 4, 2, 0)


@pytest.mark.parametrize("args,expected,tolerance", [
    ((500, 10, 60), 0.0042, 1e-4),
    ((4, 2, 1), 1 / 3.0, 1e-9),
    ((4, 2, 3), 1.0, 0),
    ((500, 10, 1000), 1.0, 0),
])
def test_counting_bound(args, expected, tolerance):
    assert abs(theory.counting_bound(*args) - expected) <= tolerance


@pytest.mark.parametrize("theta", [0.1, 0.2, 1 / 3.0])
def test_capacity_is_one_for_dense_defectives(theta):
    assert abs(theory.bernoulli_capacity(theta) - 1.0) < 1e-6


def test_capacity_sparse_branch():
    # only the test-count branch binds; it peaks at nu = 1
    expected = (1 / (math.e * LN2)) * (1 - 0.9) / 0.9
    assert abs(theory.bernoulli_capacity(0.9) - expected) < 1e-6
    assert abs(theory.bernoulli_capacity(0.9) - 0.05897) < 1e-4


def test_capacity_matches_dense_grid():
    grid = np.linspace(0.001, 10, 200001)
    for theta in (0.4, 0.5, 0.6, 0.75):
        brute = float(np.max(np.minimum(grid * np.exp(-grid) / LN2 * (1 - theta) / theta,
                                        theory.binary_entropy(np.exp(-grid)))))
        # the grid can only undershoot the true maximum
        assert brute - 1e-9 <= theory.bernoulli_capacity(theta) <= brute + 1e-4


@pytest.mark.parametrize("theta", [0, 1, -0.5, 1.5])
def test_capacity_theta_range(theta):
    pytest.raises(exceptions.ParameterError, theory.bernoulli_capacity, theta)


def test_binary_entropy():
    assert theory.binary_entropy(0.5) == pytest.approx(1.0)
    assert theory.binary_entropy(0.0) == 0.0
    assert theory.binary_entropy(1.0) == 0.0
    values = theory.binary_entropy(np.array([0.25, 0.75]))
    assert values[0] == pytest.approx(values[1])


@pytest.mark.parametrize("theta,expected", [
    (0.0, 0.5307),
    (0.5, 0.2654),
])
def test_comp_bernoulli_rate(theta, expected):
    assert abs(theory.comp_bernoulli_rate(theta) - expected) < 1e-4


@pytest.mark.parametrize("theta,expected", [
    (0.0, 0.6931),
    (0.5, 0.3466),
])
def test_comp_ccw_rate(theta, expected):
    assert abs(theory.comp_ccw_rate(theta) - expected) < 1e-4


@pytest.mark.parametrize("theta", np.linspace(0.05, 0.95, 10))
def test_rate_ratio(theta):
    ratio = theory.comp_ccw_rate(theta) / theory.comp_bernoulli_rate(theta)
    assert abs(ratio - math.e * LN2 ** 2) < 1e-9
    assert abs(theory.rate_ratio() - 1.3063) < 1e-4


@pytest.mark.parametrize("theta,expected", [
    (0.5, LN2),
    (0.9, LN2 * 0.1 / 0.9),
    (LN2 / (1 + LN2), 1.0),
    (0.1, 1.0),
])
def test_ccw_converse(theta, expected):
    assert abs(theory.ccw_converse(theta) - expected) < 1e-9


def test_ccw_converse_range():
    pytest.raises(exceptions.ParameterError, theory.ccw_converse, 0)
    assert theory.ccw_converse(1) == 0


def test_crossover():
    crossover = theory.ccw_bernoulli_crossover()
    assert abs(crossover - 0.766) < 1e-3
    assert abs(crossover - 1 / (math.e * LN2 ** 2)) < 1e-6
    assert theory.comp_ccw_rate(0.8) > theory.bernoulli_capacity(0.8)
    assert theory.comp_ccw_rate(0.7) < theory.bernoulli_capacity(0.7)


def test_dd_comparison_threshold():
    assert abs(theory.dd_comparison_threshold() - 0.234) < 1e-3


@pytest.mark.parametrize("theta", [0.1, 0.5, 0.9])
def test_optimal_nu(theta):
    assert abs(theory.optimal_nu(theory.comp_ccw_rate_nu, theta) - LN2) <= 0.001
    assert abs(theory.optimal_nu(theory.comp_bernoulli_rate_nu, theta) - 1.0) <= 0.001


@pytest.mark.parametrize("theta", [0.0, 0.3, 0.8])
def test_rate_nu_at_optimum(theta):
    assert theory.comp_ccw_rate_nu(theta, LN2) == pytest.approx(theory.comp_ccw_rate(theta))
    assert theory.comp_bernoulli_rate_nu(theta, 1.0) == pytest.approx(
        theory.comp_bernoulli_rate(theta))


@pytest.mark.parametrize("num_items,num_defectives,expected,tolerance", [
    (1024, 10, 144.27, 0.01),
    (2, 1, 1.4427, 1e-4),
    (500, 10, 129.36, 0.01),
])
def test_t_star_comp(num_items, num_defectives, expected, tolerance):
    assert abs(theory.t_star_comp(num_items, num_defectives) - expected) < tolerance


@pytest.mark.parametrize("num_items,num_defectives,expected,tolerance", [
    (500, 10, 56.44, 0.01),
    (64, 1, 6.0, 1e-12),
    (2000, 100, 958.5, 0.1),
])
def test_t_star_converse(num_items, num_defectives, expected, tolerance):
    assert abs(theory.t_star_converse(num_items, num_defectives) - expected) < tolerance


def test_t_star_comp_above_converse():
    for num_items in range(2, 300):
        for num_defectives in range(1, num_items):
            comp = theory.t_star_comp(num_items, num_defectives)
            converse = theory.t_star_converse(num_items, num_defectives)
            assert comp >= converse, (num_items, num_defectives)


def test_threshold_errors():
    pytest.raises(exceptions.ParameterError, theory.t_star_comp, 1, 1)
    pytest.raises(exceptions.ParameterError, theory.t_star_converse, 10, 10)
    pytest.raises(exceptions.ParameterError, theory.comp_bernoulli_threshold, 10, 0)


def test_comp_bernoulli_threshold():
    assert theory.comp_bernoulli_threshold(500, 10) == pytest.approx(math.e * 10 * math.log(500))
    # constant column weights save the same factor as the rates
    ratio = theory.comp_bernoulli_threshold(500, 10) / theory.t_star_comp(500, 10)
    assert ratio == pytest.approx(theory.rate_ratio())


@pytest.mark.parametrize("num_tests,selections,expected", [
    (7, 0, 0.0),
    (1, 5, 1.0),
    (2, 2, 1.5),
    (100, 7, 6.793465),
])
def test_coupon_expected_distinct(num_tests, selections, expected):
    assert abs(theory.coupon_expected_distinct(num_tests, selections) - expected) < 1e-6


def test_coupon_formula_matches_enumeration():
    for num_tests in range(1, 7):
        for selections in range(0, 7):
            formula = theory.coupon_expected_distinct(num_tests, selections)
            enumerated = theory.coupon_exhaustive_mean(num_tests, selections)
            assert abs(formula - enumerated) < 1e-12, (num_tests, selections)


def test_coupon_exhaustive_blocks():
    # small blocks take the multi-block path
    assert theory.coupon_exhaustive_mean(3, 4, block=7) == pytest.approx(
        theory.coupon_expected_distinct(3, 4), abs=1e-12)


def test_coupon_asymptotic_mean():
    assert theory.coupon_asymptotic_mean(1000, LN2) == pytest.approx(500.0)
    exact = theory.coupon_expected_distinct(10 ** 6, int(0.5 * 10 ** 6))
    assert theory.coupon_asymptotic_mean(10 ** 6, 0.5) == pytest.approx(exact, rel=1e-5)


@pytest.mark.parametrize("args,expected", [
    ((100, 0.5, 0.1), 2 * math.exp(-2)),
    ((10, 1.0, 0.01), 1.0),
])
def test_coupon_concentration_bound(args, expected):
    assert theory.coupon_concentration_bound(*args) == pytest.approx(expected)


def test_coupon_concentration_bound_decreases():
    values = [theory.coupon_concentration_bound(100, 0.5, eps) for eps in (0.1, 0.2, 0.4, 0.8)]
    assert values == sorted(values, reverse=True)
    assert all(0 <= v <= 1 for v in values)


def test_expected_positive_tests():
    assert theory.expected_positive_tests(100, 10, 7) == pytest.approx(
        theory.coupon_expected_distinct(100, 70))


@pytest.mark.parametrize("args,expected", [
    ((0, 10, 2, 13, 10), 1.0),
    ((10, 10, 2, 13, 10), 0.0),
    ((5, 10, 2, 13, 10), 0.421875),
])
def test_comp_success_given_m(args, expected):
    assert theory.comp_success_given_m(*args) == pytest.approx(expected)


@pytest.mark.parametrize("num_tests,weight,num_items,num_defectives", [
    (10, 2, 13, 10),
    (70, 5, 500, 10),
    (300, 1, 2000, 100),
])
def test_comp_success_given_m_non_increasing(num_tests, weight, num_items, num_defectives):
    values = [theory.comp_success_given_m(positives, num_tests, weight, num_items, num_defectives)
              for positives in range(num_tests + 1)]
    assert all(later <= earlier for earlier, later in zip(values, values[1:]))
    assert values[0] == 1.0
    assert values[-1] == 0.0


def test_comp_success_given_m_errors():
    pytest.raises(exceptions.ParameterError, theory.comp_success_given_m, 11, 10, 2, 13, 10)
    pytest.raises(exceptions.ParameterError, theory.comp_success_given_m, 5, 10, 0, 13, 10)


def test_theta_grid():
    assert theory.theta_grid(0.25, 0.25, 0.1) == [0.25]
    assert theory.theta_grid(0.1, 0.5, 0.1) == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert len(theory.theta_grid(0.01, 0.99, 0.01)) == 99
    pytest.raises(exceptions.ParameterError, theory.theta_grid, 0.5, 0.4, 0.1)


def test_theory_curves():
    rows = theory.theory_curves([0.25, 0.5])
    assert len(rows) == 2
    assert rows[0].bernoulli_capacity == pytest.approx(1.0, abs=1e-6)
    assert rows[1].comp_ccw == pytest.approx(0.3466, abs=1e-4)
    assert rows[1].ccw_converse == pytest.approx(0.6931, abs=1e-4)
    assert all(row.counting == 1.0 for row in rows)
    for row in rows:
        assert row.comp_bernoulli <= row.bernoulli_capacity <= row.counting + 1e-12
