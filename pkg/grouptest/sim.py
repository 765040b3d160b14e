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
Seeded Monte Carlo estimation of decoder success probabilities.

A cell is one (N, K, T, design spec, decoder) combination.  Every trial of
a cell draws a fresh design and a fresh defective set from a seed derived
from (sweep seed, T, spec, decoder, trial number), so results don't depend
on how trials are split between threads or in what order cells run.
"""

from collections import namedtuple, OrderedDict
from concurrent.futures import ThreadPoolExecutor
import csv
import logging
import math
import os

import numpy as np
from scipy import stats
import six

from grouptest import designs, events, exceptions, theory
from grouptest.decoders import DECODERS, DEFAULT_SSS_BUDGET, DeclaredError, decode, is_success
from grouptest.designs import DesignSpec
from grouptest.model import sample_defective_set
from grouptest.utils import NullHandler, check_seed, derive_seed, format_float, stable_id

LOG = logging.getLogger(__name__)
LOG.addHandler(NullHandler())

TOPIC = __name__

DEFAULT_TRIALS = 1000
DEFAULT_CONFIDENCE = 0.95
# above this N*K the exact search is left out unless asked for by name
SSS_PRODUCT_LIMIT = 50000

CSV_COLUMNS = ['design', 'design_params', 'decoder', 'N', 'K', 'T', 'trials', 'successes',
               'declared_errors', 'success_rate', 'ci_low', 'ci_high', 'seed']

TrialStats = namedtuple('TrialStats', ['design', 'design_params', 'decoder', 'N', 'K', 'T',
                                       'trials', 'successes', 'failures', 'declared_errors',
                                       'success_rate', 'ci_low', 'ci_high', 'seed'])
TrialOutcome = namedtuple('TrialOutcome', ['success', 'declared_error', 'positives'])
CompCrossCheck = namedtuple('CompCrossCheck', ['empirical', 'predicted', 'predicted_low',
                                               'predicted_high', 'mean_positives', 'weight'])
CouponTail = namedtuple('CouponTail', ['num_tests', 'alpha', 'epsilon', 'trials',
                                       'exceedances', 'empirical', 'bound'])


def wilson_interval(successes, trials, confidence=DEFAULT_CONFIDENCE):
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise exceptions.ParameterError("Need 0 <= successes <= trials and trials >= 1, got "
                                        "%s/%s" % (successes, trials))
    z = stats.norm.ppf(1 - (1 - confidence) / 2.0)
    phat = float(successes) / trials
    denominator = 1 + z ** 2 / trials
    center = (phat + z ** 2 / (2.0 * trials)) / denominator
    spread = z * math.sqrt(phat * (1 - phat) / trials + z ** 2 / (4.0 * trials ** 2))
    spread /= denominator
    # clamp rounding so that low <= phat <= high always holds
    return max(0.0, min(phat, center - spread)), min(1.0, max(phat, center + spread))


def default_decoders(num_items, num_defectives):
    """Every decoder, minus SSS when the instance is too large for exact search."""
    names = list(DECODERS)
    if num_items * num_defectives > SSS_PRODUCT_LIMIT:
        names.remove('SSS')
    return names


def resolve_threads(threads):
    if threads is None or threads < 0:
        raise exceptions.ParameterError("Thread count must be >= 0 (0 = auto): %r" % (threads,))
    if threads == 0:
        return os.cpu_count() or 1
    return threads


class SimConfig(object):
    """A full sweep definition: every T crossed with every design and decoder."""

    keys = ('N', 'K', 'T_values', 'designs', 'decoders', 'trials', 'seed', 'sss_budget')

    def __init__(self, N, K, T_values, designs, decoders=None, trials=DEFAULT_TRIALS, seed=0,
                 sss_budget=DEFAULT_SSS_BUDGET):
        # pylint: disable=invalid-name,redefined-outer-name
        for key, value in (('N', N), ('K', K), ('trials', trials), ('sss_budget', sss_budget)):
            if not _is_int(value):
                raise exceptions.ConfigError(key, "must be an integer, got %r" % (value,))
        if not 1 <= K < N:
            raise exceptions.ConfigError('K', "need 1 <= K < N, got N=%s K=%s" % (N, K))
        if trials < 1:
            raise exceptions.ConfigError('trials', "need at least one trial")
        if sss_budget < 1:
            raise exceptions.ConfigError('sss_budget', "need a positive node budget")

        if not isinstance(T_values, (list, tuple)) or not T_values:
            raise exceptions.ConfigError('T_values', "need a non-empty list of test counts")
        if any(not _is_int(t) or t < 1 for t in T_values):
            raise exceptions.ConfigError('T_values', "test counts must be positive integers")

        if not isinstance(designs, (list, tuple)) or not designs:
            raise exceptions.ConfigError('designs', "need a non-empty list of designs")
        designs = [d if isinstance(d, DesignSpec) else DesignSpec.from_dict(d) for d in designs]

        if decoders is None:
            decoders = default_decoders(N, K)
        if not isinstance(decoders, (list, tuple)) or not decoders:
            raise exceptions.ConfigError('decoders', "need a non-empty list of decoders")
        for name in decoders:
            if name not in DECODERS:
                raise exceptions.ConfigError('decoders', "unknown decoder %r" % (name,))
        if 'SSS' in decoders and N * K > SSS_PRODUCT_LIMIT:
            LOG.warning("SSS requested for N=%s K=%s; exact search may exhaust its budget",
                        N, K)

        try:
            seed = check_seed(seed)
        except exceptions.ParameterError as exc:
            raise exceptions.ConfigError('seed', exc.message)

        self.N = N
        self.K = K
        self.T_values = sorted(set(int(t) for t in T_values))
        self.designs = list(designs)
        self.decoders = [name for name in DECODERS if name in decoders]
        self.trials = trials
        self.seed = seed
        self.sss_budget = sss_budget

    @classmethod
    def from_dict(cls, data, allowed_extra=('tool_version',)):
        """Strictly parse a config-file dictionary; unknown keys are errors."""
        if not isinstance(data, dict):
            raise exceptions.ConfigError('<root>', "config must be a JSON object")
        for key in data:
            if key not in cls.keys and key not in allowed_extra:
                raise exceptions.ConfigError(key, "unknown key")
        for key in ('N', 'K', 'T_values', 'designs'):
            if key not in data:
                raise exceptions.ConfigError(key, "missing required key")
        kwargs = dict((key, value) for key, value in six.iteritems(data) if key in cls.keys)
        return cls(**kwargs)

    def to_dict(self):
        return OrderedDict([
            ('N', self.N),
            ('K', self.K),
            ('T_values', list(self.T_values)),
            ('designs', [spec.to_dict() for spec in self.designs]),
            ('decoders', list(self.decoders)),
            ('trials', self.trials),
            ('seed', self.seed),
            ('sss_budget', self.sss_budget),
        ])

    def cells(self):
        """(T, spec, decoder) in the order rows are reported."""
        specs = sorted(self.designs, key=lambda spec: spec.sort_key)
        return [(num_tests, spec, decoder)
                for num_tests in self.T_values
                for spec in specs
                for decoder in self.decoders]


def _is_int(value):
    return not isinstance(value, bool) and isinstance(value, (int, np.integer))


def trial_seed(seed, num_tests, spec, decoder, trial):
    """The seed of one trial, from its coordinates in the sweep."""
    spec_id = stable_id(repr(spec.sort_key))
    decoder_id = list(DECODERS).index(decoder)
    return derive_seed(seed, num_tests, spec_id, decoder_id, trial)


def run_trial(num_items, num_defectives, num_tests, spec, decoder, seed,
              sss_budget=DEFAULT_SSS_BUDGET):
    """Draw a design and a defective set from one trial seed, then decode."""
    design = spec.generate(num_items, num_tests, num_defectives, derive_seed(seed, 0))
    instance = sample_defective_set(num_items, num_defectives, derive_seed(seed, 1))
    outcomes = instance.outcomes(design)
    result = decode(decoder, design, outcomes, sss_budget=sss_budget)
    return TrialOutcome(success=is_success(result, instance.defective_set),
                        declared_error=isinstance(result, DeclaredError),
                        positives=outcomes.positive_count)


def _check_cell(num_items, num_defectives, num_tests, spec, decoder, trials):
    if not 1 <= num_defectives < num_items:
        raise exceptions.ParameterError("Need 1 <= K < N, got N=%s K=%s"
                                        % (num_items, num_defectives))
    if num_tests < 1 or trials < 1:
        raise exceptions.ParameterError("Need T >= 1 and trials >= 1")
    if decoder not in DECODERS:
        raise exceptions.ParameterError("Unknown decoder %r" % (decoder,))
    if isinstance(spec, designs.ConstantColumnWeightSpec):
        weight = designs.column_weight(spec, num_tests, num_defectives)
        if weight > num_tests:
            raise exceptions.ParameterError("Column weight %s exceeds T=%s" % (weight, num_tests))


def _run_trials(num_items, num_defectives, num_tests, spec, decoder, trials, seed, sss_budget,
                threads):
    """Every trial outcome of a cell, in trial order."""
    def chunk(trial_numbers):
        return [run_trial(num_items, num_defectives, num_tests, spec, decoder,
                          trial_seed(seed, num_tests, spec, decoder, j), sss_budget)
                for j in trial_numbers]

    workers = min(resolve_threads(threads), trials)
    if workers == 1:
        return chunk(range(trials))

    bounds = np.linspace(0, trials, workers + 1).astype(int)
    ranges = [range(bounds[w], bounds[w + 1]) for w in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(chunk, ranges))
    return [outcome for part in results for outcome in part]


def make_stats(num_items, num_defectives, num_tests, spec, decoder, seed, outcomes):
    trials = len(outcomes)
    successes = sum(1 for outcome in outcomes if outcome.success)
    declared = sum(1 for outcome in outcomes if outcome.declared_error)
    low, high = wilson_interval(successes, trials)
    return TrialStats(design=spec.kind, design_params=spec.params(num_defectives),
                      decoder=decoder, N=num_items, K=num_defectives, T=num_tests,
                      trials=trials, successes=successes, failures=trials - successes,
                      declared_errors=declared, success_rate=float(successes) / trials,
                      ci_low=low, ci_high=high, seed=seed)


def run_cell(num_items, num_defectives, num_tests, spec, decoder, trials, seed,
             sss_budget=DEFAULT_SSS_BUDGET, threads=1):
    """Success statistics of one decoder on one design family at one test count."""
    _check_cell(num_items, num_defectives, num_tests, spec, decoder, trials)
    seed = check_seed(seed)
    outcomes = _run_trials(num_items, num_defectives, num_tests, spec, decoder, trials, seed,
                           sss_budget, threads)
    stats_row = make_stats(num_items, num_defectives, num_tests, spec, decoder, seed, outcomes)
    LOG.debug("Cell N=%s K=%s T=%s %s %s: %s/%s", num_items, num_defectives, num_tests,
              spec.kind, decoder, stats_row.successes, trials)
    return stats_row


@events.evented(TOPIC)
def run_sweep(config, threads=1):
    """Run every cell of a config.

    Returns an OrderedDict keyed by (T, spec, decoder) in the reporting order.
    A PROGRESS 'cell' event is published after each cell.
    """
    cells = config.cells()
    table = OrderedDict()
    for index, (num_tests, spec, decoder) in enumerate(cells):
        try:
            row = run_cell(config.N, config.K, num_tests, spec, decoder, config.trials,
                           config.seed, sss_budget=config.sss_budget, threads=threads)
        except Exception as exc:
            cell = "N=%s K=%s T=%s design=%s(%s) decoder=%s" % (
                config.N, config.K, num_tests, spec.kind, spec.params(config.K), decoder)
            raise exceptions.CellError(cell, exc)
        table[(num_tests, spec, decoder)] = row
        events.publish(TOPIC, 'cell', events.states.PROGRESS,
                       stats=row, index=index + 1, total=len(cells))
    return table


def comp_crosscheck(num_items, num_defectives, num_tests, nu, trials, seed, threads=1,
                    confidence=DEFAULT_CONFIDENCE):
    """COMP success on a with-replacement design against the conditional formula.

    The prediction averages P(success | M) over the positive-test counts M
    observed in the same trials.
    """
    spec = designs.ConstantColumnWeightSpec(nu, designs.WITH_REPLACEMENT)
    _check_cell(num_items, num_defectives, num_tests, spec, 'COMP', trials)
    seed = check_seed(seed)
    weight = designs.column_weight(spec, num_tests, num_defectives)

    outcomes = _run_trials(num_items, num_defectives, num_tests, spec, 'COMP', trials, seed,
                           DEFAULT_SSS_BUDGET, threads)
    empirical = make_stats(num_items, num_defectives, num_tests, spec, 'COMP', seed, outcomes)

    positives = np.array([outcome.positives for outcome in outcomes])
    predictions = np.array([
        theory.comp_success_given_m(m, num_tests, weight, num_items, num_defectives)
        for m in positives
    ])
    z = stats.norm.ppf(1 - (1 - confidence) / 2.0)
    spread = z * predictions.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
    predicted = float(predictions.mean())
    return CompCrossCheck(empirical=empirical, predicted=predicted,
                          predicted_low=max(0.0, predicted - spread),
                          predicted_high=min(1.0, predicted + spread),
                          mean_positives=float(positives.mean()), weight=weight)


def comp_threshold_sweep(num_items, num_defectives, nu, trials, seed, factors=(0.8, 1.2),
                         threads=1):
    """COMP on constant column weight designs at multiples of its threshold test count."""
    spec = designs.ConstantColumnWeightSpec(nu, designs.WITH_REPLACEMENT)
    threshold = theory.t_star_comp(num_items, num_defectives)
    rows = []
    for factor in factors:
        num_tests = int(math.ceil(factor * threshold))
        rows.append(run_cell(num_items, num_defectives, num_tests, spec, 'COMP', trials, seed,
                             threads=threads))
    return rows


def simulate_distinct_counts(num_tests, selections, trials, seed):
    """Distinct coupons after `selections` uniform draws from `num_tests`, per trial."""
    if num_tests < 1 or selections < 0 or trials < 1:
        raise exceptions.ParameterError("Need T >= 1, c >= 0 and trials >= 1")
    if selections == 0:
        return np.zeros(trials, dtype=np.int64)
    generator = np.random.default_rng(check_seed(seed))
    draws = np.sort(generator.integers(0, num_tests, size=(trials, selections)), axis=1)
    return 1 + (np.diff(draws, axis=1) != 0).sum(axis=1)


def coupon_tail(num_tests, alpha, epsilon, trials, seed):
    """Empirical P(|W - (1 - e^-alpha) T| >= epsilon T) next to its concentration bound."""
    selections = int(round(alpha * num_tests))
    counts = simulate_distinct_counts(num_tests, selections, trials, seed)
    center = theory.coupon_asymptotic_mean(num_tests, alpha)
    exceedances = int((np.abs(counts - center) >= epsilon * num_tests).sum())
    return CouponTail(num_tests=num_tests, alpha=alpha, epsilon=epsilon, trials=trials,
                      exceedances=exceedances, empirical=float(exceedances) / trials,
                      bound=theory.coupon_concentration_bound(num_tests, alpha, epsilon))


def format_row(row):
    """A TrialStats as CSV fields in CSV_COLUMNS order."""
    return [row.design, row.design_params, row.decoder, str(row.N), str(row.K), str(row.T),
            str(row.trials), str(row.successes), str(row.declared_errors),
            format_float(row.success_rate), format_float(row.ci_low),
            format_float(row.ci_high), str(row.seed)]


def write_csv(rows, stream):
    """Write the header and one line per TrialStats to an open text stream."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(format_row(row))
