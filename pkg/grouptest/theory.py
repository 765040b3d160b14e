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

"""
Closed-form rates, capacities, test-count thresholds and coupon collector
quantities.

Rates are in bits per test: recovering K defectives out of N means learning
log2(N choose K) bits.  Sparsity is described by the density parameter
theta, with K growing like N**theta.  The rate curves are the large-N
limits as a function of theta; the thresholds are test counts for a given
(N, K).
"""

from collections import namedtuple
import logging
import math

import numpy as np
from scipy import optimize, special

from grouptest import exceptions
from grouptest.utils import NullHandler

LOG = logging.getLogger(__name__)
LOG.addHandler(NullHandler())

LN2 = math.log(2)
EXACT_BINOMIAL_LIMIT = 1000

# nu grid for the Bernoulli capacity maximisation
CAPACITY_GRID = np.round(np.arange(1, 1001) * 0.01, 2)

RatePoint = namedtuple('RatePoint', ['theta', 'value'])
CurveRow = namedtuple('CurveRow', ['theta', 'bernoulli_capacity', 'comp_bernoulli',
                                   'comp_ccw', 'ccw_converse', 'counting'])


def _check_binomial(num_items, num_defectives):
    if num_items < 0 or not 0 <= num_defectives <= num_items:
        raise exceptions.ParameterError("Need 0 <= K <= N, got N=%s K=%s"
                                        % (num_items, num_defectives))


def _check_theta(theta, closed=False):
    if closed:
        valid = 0 <= theta <= 1
    else:
        valid = 0 < theta < 1
    if not valid:
        raise exceptions.ParameterError("Density parameter theta out of range: %s" % theta)


def log2_binomial_exact(num_items, num_defectives):
    """log2(N choose K) from the exact big integer."""
    _check_binomial(num_items, num_defectives)
    return math.log2(math.comb(num_items, num_defectives))


def log2_binomial_lgamma(num_items, num_defectives):
    """log2(N choose K) through the log-gamma function."""
    _check_binomial(num_items, num_defectives)
    nats = (special.gammaln(num_items + 1) - special.gammaln(num_defectives + 1)
            - special.gammaln(num_items - num_defectives + 1))
    return float(nats) / LN2


def log2_binomial(num_items, num_defectives):
    """Bits needed to pick out K defectives among N items."""
    if num_items <= EXACT_BINOMIAL_LIMIT:
        return log2_binomial_exact(num_items, num_defectives)
    return log2_binomial_lgamma(num_items, num_defectives)


def rate(num_items, num_defectives, num_tests):
    if num_tests < 1:
        raise exceptions.ParameterError("Need at least one test, got %s" % num_tests)
    return log2_binomial(num_items, num_defectives) / num_tests


def counting_bound(num_items, num_defectives, num_tests):
    """No design and no algorithm succeeds with probability above 2**T / (N choose K)."""
    if num_tests < 0:
        raise exceptions.ParameterError("Negative test count: %s" % num_tests)
    exponent = num_tests - log2_binomial(num_items, num_defectives)
    if exponent >= 0:
        return 1.0
    return 2.0 ** exponent


def binary_entropy(x):
    """h(x) in bits; works elementwise on arrays."""
    x = np.asarray(x, dtype=float)
    value = (special.entr(x) + special.entr(1 - x)) / LN2
    if value.ndim == 0:
        return float(value)
    return value


def _capacity_objective(nu, theta):
    nu = np.asarray(nu, dtype=float)
    tests_branch = nu * np.exp(-nu) / LN2 * (1 - theta) / theta
    entropy_branch = binary_entropy(np.exp(-nu))
    return np.minimum(tests_branch, entropy_branch)


def bernoulli_capacity(theta):
    """Capacity of nonadaptive testing with Bernoulli designs.

    max over nu > 0 of min{ nu e^-nu (1 - theta) / (theta ln 2), h(e^-nu) }.
    A coarse grid over nu in [0.01, 10] finds the bracket, a bounded Brent
    search refines it.
    """
    _check_theta(theta)
    values = _capacity_objective(CAPACITY_GRID, theta)
    best = int(values.argmax())
    low = CAPACITY_GRID[max(best - 1, 0)]
    high = CAPACITY_GRID[min(best + 1, len(CAPACITY_GRID) - 1)]

    refined = optimize.minimize_scalar(lambda nu: -float(_capacity_objective(nu, theta)),
                                       bounds=(low, high), method='bounded',
                                       options={'xatol': 1e-12})
    return max(float(values[best]), -float(refined.fun))


def comp_bernoulli_rate(theta):
    """Maximum COMP rate with a Bernoulli design, (1 - theta) / (e ln 2)."""
    _check_theta(theta, closed=True)
    return (1 - theta) / (math.e * LN2)


def comp_ccw_rate(theta):
    """Maximum COMP rate with a constant column weight design, ln 2 (1 - theta)."""
    _check_theta(theta, closed=True)
    return LN2 * (1 - theta)


def comp_bernoulli_rate_nu(theta, nu):
    """COMP rate with Bernoulli p = nu/K; peaks at nu = 1."""
    nu = np.asarray(nu, dtype=float)
    return (1 - theta) * nu * np.exp(-nu) / LN2


def comp_ccw_rate_nu(theta, nu):
    """COMP rate with column weight L = nu T / K; peaks at nu = ln 2.

    An item avoids every negative test with probability (1 - e^-nu)^L, so
    COMP needs T = K ln N / (-nu ln(1 - e^-nu)) tests.
    """
    nu = np.asarray(nu, dtype=float)
    return (1 - theta) * nu * -np.log1p(-np.exp(-nu)) / LN2


def optimal_nu(rate_fn, theta, grid=None):
    """The grid point maximising rate_fn(theta, nu)."""
    if grid is None:
        grid = np.arange(1, 5001) * 0.001
    return float(grid[int(np.argmax(rate_fn(theta, grid)))])


def ccw_converse(theta):
    """Upper bound on any rate with a constant column weight design."""
    if not 0 < theta <= 1:
        raise exceptions.ParameterError("Density parameter theta out of range: %s" % theta)
    return min(1.0, LN2 * (1 - theta) / theta)


def rate_ratio():
    """comp_ccw_rate / comp_bernoulli_rate, the same for every theta."""
    return math.e * LN2 ** 2


def ccw_bernoulli_crossover():
    """The theta above which COMP with constant column weights beats any Bernoulli algorithm."""
    return optimize.brentq(lambda theta: comp_ccw_rate(theta) - bernoulli_capacity(theta),
                           0.5, 0.99, xtol=1e-10)


def dd_comparison_threshold():
    """Below this theta COMP with constant column weights beats the DD Bernoulli bound."""
    return 1 - 1 / (math.e * LN2 ** 2)


def t_star_comp(num_items, num_defectives):
    """Tests COMP needs with a constant column weight design: K log2(N) / ln 2."""
    if num_items < 2 or num_defectives < 1:
        raise exceptions.ParameterError("Need N >= 2 and K >= 1, got N=%s K=%s"
                                        % (num_items, num_defectives))
    return num_defectives * math.log2(num_items) / LN2


def t_star_converse(num_items, num_defectives):
    """Below this many tests every algorithm fails with constant column weights."""
    if not num_items > num_defectives >= 1:
        raise exceptions.ParameterError("Need N > K >= 1, got N=%s K=%s"
                                        % (num_items, num_defectives))
    counting = num_defectives * math.log2(num_items / num_defectives)
    collisions = num_defectives * math.log2(num_defectives) / LN2
    return max(counting, collisions)


def comp_bernoulli_threshold(num_items, num_defectives):
    """Tests COMP needs with a Bernoulli design: e K ln N."""
    if num_items < 2 or num_defectives < 1:
        raise exceptions.ParameterError("Need N >= 2 and K >= 1, got N=%s K=%s"
                                        % (num_items, num_defectives))
    return math.e * num_defectives * math.log(num_items)


def coupon_expected_distinct(num_tests, selections):
    """Expected number of distinct coupons after `selections` uniform draws."""
    if num_tests < 1 or selections < 0:
        raise exceptions.ParameterError("Need T >= 1 and c >= 0, got T=%s c=%s"
                                        % (num_tests, selections))
    return (1 - (1 - 1.0 / num_tests) ** selections) * num_tests


def coupon_asymptotic_mean(num_tests, alpha):
    """(1 - e^-alpha) T, the large-T form of the mean for alpha T draws."""
    return -math.expm1(-alpha) * num_tests


def coupon_exhaustive_mean(num_tests, selections, block=1 << 18):
    """Expected distinct coupons by walking every one of the T**c draw sequences.

    Sequence number s encodes its draws as the base-T digits of s.
    """
    if num_tests < 1 or selections < 0:
        raise exceptions.ParameterError("Need T >= 1 and c >= 0, got T=%s c=%s"
                                        % (num_tests, selections))
    if selections == 0:
        return 0.0

    sequences = num_tests ** selections
    total = 0
    for start in range(0, sequences, block):
        codes = np.arange(start, min(start + block, sequences), dtype=np.int64)
        rows = np.arange(codes.size)
        seen = np.zeros((codes.size, num_tests), dtype=bool)
        for _ in range(selections):
            seen[rows, codes % num_tests] = True
            codes //= num_tests
        total += int(seen.sum())
    return total / float(sequences)


def coupon_concentration_bound(num_tests, alpha, epsilon):
    """P(|W(alpha T) - (1 - e^-alpha) T| >= epsilon T) <= 2 exp(-epsilon^2 T / alpha)."""
    if num_tests < 1 or alpha <= 0 or epsilon <= 0:
        raise exceptions.ParameterError("Need T >= 1, alpha > 0 and epsilon > 0")
    return min(1.0, 2 * math.exp(-epsilon ** 2 * num_tests / alpha))


def expected_positive_tests(num_tests, num_defectives, weight):
    """Mean number of positive tests: K L draws over T coupons."""
    return coupon_expected_distinct(num_tests, num_defectives * weight)


def comp_success_given_m(positives, num_tests, weight, num_items, num_defectives):
    """P(COMP succeeds | M positive tests) = (1 - (M/T)^L)^(N - K).

    Holds for designs whose L column draws are iid uniform over the tests.
    """
    if not 0 <= positives <= num_tests:
        raise exceptions.ParameterError("Need 0 <= M <= T, got M=%s T=%s"
                                        % (positives, num_tests))
    if weight < 1 or not num_items > num_defectives:
        raise exceptions.ParameterError("Need L >= 1 and N > K")
    return (1 - (float(positives) / num_tests) ** weight) ** (num_items - num_defectives)


def rate_curve(rate_fn, thetas):
    return [RatePoint(float(theta), float(rate_fn(theta))) for theta in thetas]


def theta_grid(theta_min, theta_max, step):
    """Inclusive grid from theta_min to theta_max."""
    if not 0 < theta_min <= theta_max < 1 or step <= 0:
        raise exceptions.ParameterError("Need 0 < theta_min <= theta_max < 1 and step > 0")
    count = int(math.floor((theta_max - theta_min) / step + 1e-9)) + 1
    return [round(theta_min + i * step, 10) for i in range(count)]


def theory_curves(thetas):
    """One row of every in-scope rate curve per theta."""
    curves = [rate_curve(fn, thetas) for fn in (bernoulli_capacity, comp_bernoulli_rate,
                                                comp_ccw_rate, ccw_converse)]
    rows = []
    for points in zip(*curves):
        rows.append(CurveRow(points[0].theta, *[point.value for point in points], counting=1.0))
    return rows
