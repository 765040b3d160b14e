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
Command-line front end.

    grouptest simulate --config sweep.json --out results.csv
    grouptest theory-curves --theta-min 0.05 --theta-max 0.95 --step 0.05 --out rates.csv
    grouptest coupon-check
    grouptest comp-check
    grouptest threshold-check
    grouptest repro-fig1 --out fig1.csv
    grouptest repro-fig2 --out fig2/

Every CSV gets a gnuplot stub next to it, and simulation CSVs also get a
<csv>.json sidecar holding the resolved config.  Feeding the sidecar back
with --config reproduces the CSV byte for byte.
"""

import argparse
import csv
import functools
import io
import json
import logging
import math
import os
import sys
import traceback

import six

import grouptest
from grouptest import designs, events, exceptions, sim, theory, utils
from grouptest.decoders import DEFAULT_SSS_BUDGET

LOG = logging.getLogger(__name__)
LOG.addHandler(utils.NullHandler())

THEORY_COLUMNS = ['theta', 'bernoulli_capacity', 'comp_bernoulli', 'comp_ccw', 'ccw_converse',
                  'counting']

# the Bernoulli comparison design: p = ln(2)/K by default, p = 1/K on request
BERNOULLI_NU = {
    'ln2/K': theory.LN2,
    '1/K': 1.0,
}

FIG2_PRESETS = [
    {'N': 500, 'K': 10, 'T_values': list(range(60, 141, 10)),
     'decoders': ['COMP', 'DD', 'SSS']},
    {'N': 2000, 'K': 100, 'T_values': list(range(300, 1501, 100)),
     'decoders': ['COMP', 'DD', 'SCOMP']},
]


def sweep_event(event, event_state, topic, **kwargs):
    # pylint: disable=unused-argument
    six.print_("%s: %s" % (utils.normalize_underscore_case(event), event_state), file=sys.stderr)


def cell_progress(topic, stats, index, total, **kwargs):
    # pylint: disable=unused-argument
    six.print_("[%d/%d] T=%s %s %s: %s/%s" % (index, total, stats.T, stats.design,
                                               stats.decoder, stats.successes, stats.trials),
               file=sys.stderr)


def get_default_config():
    return {
        "trials": sim.DEFAULT_TRIALS,
        "seed": 0,
        "sss_budget": DEFAULT_SSS_BUDGET,
    }


def parse_config_file(config_path):
    with open(config_path, 'r') as config_file:
        try:
            config = json.load(config_file)
        except ValueError as exc:
            raise exceptions.ConfigError('<file>', "malformed JSON in %s: %s" % (config_path, exc))
    if not isinstance(config, dict):
        raise exceptions.ConfigError('<root>', "config must be a JSON object")
    return config


def parse_cli_opts(opts):
    overrides = {
        'seed': opts.seed,
        'trials': opts.trials,
        'sss_budget': opts.sss_budget,
    }
    return dict((key, value) for key, value in six.iteritems(overrides) if value is not None)


def check_tool_version(config):
    if 'tool_version' not in config:
        return
    try:
        written = utils.version_tuple(config['tool_version'])
    except ValueError:
        raise exceptions.ConfigError('tool_version', "not a version string: %r"
                                     % (config['tool_version'],))
    if written[:1] != utils.version_tuple(grouptest.__version__)[:1]:
        LOG.warning("Config written by version %s, running %s", utils.version_str(written),
                    grouptest.__version__)


def resolve_config(base, opts):
    """Defaults, then the preset or config file, then command-line flags."""
    config = get_default_config()
    config.update(base)
    config.update(parse_cli_opts(opts))
    check_tool_version(config)
    return sim.SimConfig.from_dict(config)


def sidecar_dict(config):
    data = config.to_dict()
    data['tool_version'] = grouptest.__version__
    return data


def plot_stub(csv_path, xlabel, ylabel, plots, extra=None):
    """A gnuplot script drawing `plots` (gnuplot plot clauses) from a CSV."""
    lines = [
        "# gnuplot stub for %s" % os.path.basename(csv_path),
        "set datafile separator ','",
        "set xlabel '%s'" % xlabel,
        "set ylabel '%s'" % ylabel,
        "set key bottom right",
    ]
    lines.extend(extra or [])
    lines.append("plot " + ", \\\n     ".join(plots))
    return '\n'.join(lines) + '\n'


def write_text(path, text):
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with io.open(path, 'w', encoding='utf-8', newline='\n') as out_file:
        out_file.write(six.text_type(text))


def write_sweep(config, out_path, threads):
    """Run a sweep; write its CSV, the resolved-config sidecar and a plot stub."""
    table = sim.run_sweep(config, threads=threads)

    buf = io.StringIO(newline='')
    sim.write_csv(table.values(), buf)
    write_text(out_path, buf.getvalue())
    write_text(out_path + '.json', json.dumps(sidecar_dict(config), indent=2) + '\n')

    name = os.path.basename(out_path)
    plots = []
    for spec in sorted(config.designs, key=lambda spec: spec.sort_key):
        for decoder in config.decoders:
            pattern = "^%s,%s,%s," % (spec.kind, spec.params(config.K), decoder)
            plots.append("'< grep \"%s\" %s' using 6:10 with linespoints title '%s %s'"
                         % (pattern, name, spec.kind, decoder))
    plots.append("counting(x) title 'counting bound'")
    bits = theory.log2_binomial(config.N, config.K)
    extra = ["counting(x) = x >= %.6f ? 1 : 2**(x - %.6f)" % (bits, bits)]
    write_text(os.path.splitext(out_path)[0] + '.gp',
               plot_stub(out_path, 'Number of tests T', 'Success probability', plots, extra))
    LOG.info("Wrote %s rows to %s", len(table), out_path)
    return table


def cmd_simulate(opts):
    if not opts.config:
        raise exceptions.UsageError("simulate needs --config")
    config = resolve_config(parse_config_file(opts.config), opts)
    write_sweep(config, opts.out or 'simulate.csv', opts.threads)
    return exceptions.EXIT_SUCCESS


def write_theory_csv(thetas, out_path):
    buf = io.StringIO(newline='')
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(THEORY_COLUMNS)
    for row in theory.theory_curves(thetas):
        writer.writerow([utils.format_float(value) for value in row])
    write_text(out_path, buf.getvalue())

    name = os.path.basename(out_path)
    plots = ["'%s' every ::1 using 1:%d with lines title '%s'" % (name, column, title)
             for column, title in enumerate(THEORY_COLUMNS[1:], 2)]
    write_text(os.path.splitext(out_path)[0] + '.gp',
               plot_stub(out_path, 'Density parameter theta', 'Rate (bits per test)', plots))


def cmd_theory_curves(opts):
    if not 0 < opts.theta_min <= opts.theta_max < 1 or opts.step <= 0:
        raise exceptions.ParameterError("Need 0 < theta-min <= theta-max < 1 and step > 0")
    thetas = theory.theta_grid(opts.theta_min, opts.theta_max, opts.step)
    write_theory_csv(thetas, opts.out or 'theory_curves.csv')
    return exceptions.EXIT_SUCCESS


def cmd_repro_fig1(opts):
    write_theory_csv(theory.theta_grid(0.01, 0.99, 0.01), opts.out or 'fig1.csv')
    return exceptions.EXIT_SUCCESS


def fig2_configs(opts):
    nu = BERNOULLI_NU[opts.bernoulli_p]
    specs = [designs.BernoulliSpec(nu=nu).to_dict(),
             designs.ConstantColumnWeightSpec(theory.LN2).to_dict()]
    configs = []
    for preset in FIG2_PRESETS:
        base = dict(preset, designs=specs)
        configs.append(resolve_config(base, opts))
    return configs


def cmd_repro_fig2(opts):
    out_dir = opts.out or 'fig2'
    for config in fig2_configs(opts):
        out_path = os.path.join(out_dir, 'fig2_N%d_K%d.csv' % (config.N, config.K))
        write_sweep(config, out_path, opts.threads)
        six.print_("Wrote %s" % out_path)
    return exceptions.EXIT_SUCCESS


def _verdict(passed):
    return 'PASS' if passed else 'FAIL'


def cmd_coupon_check(opts):
    if not 1 <= opts.t_max <= 8 or not 0 <= opts.c_max <= 8:
        raise exceptions.ParameterError("Exhaustive check needs 1 <= t-max <= 8 and "
                                        "0 <= c-max <= 8")
    passed = True
    for num_tests in range(1, opts.t_max + 1):
        for selections in range(0, opts.c_max + 1):
            formula = theory.coupon_expected_distinct(num_tests, selections)
            enumerated = theory.coupon_exhaustive_mean(num_tests, selections)
            ok = abs(formula - enumerated) <= 1e-12
            passed = passed and ok
            six.print_("%s exhaustive T=%d c=%d: formula=%.12f enumeration=%.12f"
                       % (_verdict(ok), num_tests, selections, formula, enumerated))

    seed = opts.seed if opts.seed is not None else 0
    selections = int(round(opts.alpha * opts.mc_tests))
    counts = sim.simulate_distinct_counts(opts.mc_tests, selections, opts.mc_trials, seed)
    formula = theory.coupon_expected_distinct(opts.mc_tests, selections)
    error = counts.std(ddof=1) / math.sqrt(opts.mc_trials) if opts.mc_trials > 1 else 0.0
    ok = abs(counts.mean() - formula) <= 4 * error + 1e-9
    passed = passed and ok
    six.print_("%s monte-carlo T=%d c=%d: mean=%.4f formula=%.4f (4 s.e. = %.4f)"
               % (_verdict(ok), opts.mc_tests, selections, counts.mean(), formula, 4 * error))

    tail = sim.coupon_tail(opts.mc_tests, opts.alpha, opts.epsilon, opts.mc_trials, seed + 1)
    ok = tail.empirical <= tail.bound
    passed = passed and ok
    six.print_("%s concentration T=%d alpha=%.4f epsilon=%.4f: empirical=%.6f bound=%.6f"
               % (_verdict(ok), tail.num_tests, tail.alpha, tail.epsilon, tail.empirical,
                  tail.bound))
    return exceptions.EXIT_SUCCESS if passed else exceptions.EXIT_FAILURE


def cmd_comp_check(opts):
    trials = opts.trials or 2000
    seed = opts.seed if opts.seed is not None else 0
    check = sim.comp_crosscheck(opts.N, opts.K, opts.T, opts.nu, trials, seed,
                                threads=opts.threads)
    empirical = check.empirical
    overlap = (empirical.ci_low <= check.predicted_high
               and check.predicted_low <= empirical.ci_high)
    six.print_("COMP N=%d K=%d T=%d L=%d mean M=%.2f" % (opts.N, opts.K, opts.T, check.weight,
                                                         check.mean_positives))
    six.print_("  empirical %.4f [%.4f, %.4f]" % (empirical.success_rate, empirical.ci_low,
                                                  empirical.ci_high))
    six.print_("  predicted %.4f [%.4f, %.4f]" % (check.predicted, check.predicted_low,
                                                  check.predicted_high))
    six.print_(_verdict(overlap))
    return exceptions.EXIT_SUCCESS if overlap else exceptions.EXIT_FAILURE


def cmd_threshold_check(opts):
    trials = opts.trials or 500
    seed = opts.seed if opts.seed is not None else 0
    threshold = theory.t_star_comp(opts.N, opts.K)
    six.print_("T*_COMP for N=%d K=%d: %.2f" % (opts.N, opts.K, threshold))
    rows = sim.comp_threshold_sweep(opts.N, opts.K, opts.nu, trials, seed,
                                    factors=opts.factors, threads=opts.threads)
    for factor, row in zip(opts.factors, rows):
        six.print_("  %.2f T* -> T=%d: %.4f [%.4f, %.4f]" % (factor, row.T, row.success_rate,
                                                            row.ci_low, row.ci_high))
    return exceptions.EXIT_SUCCESS


def _add_run_flags(parser, config=True):
    if config:
        parser.add_argument('--config', help='JSON experiment definition')
    parser.add_argument('--out', help='output path')
    parser.add_argument('--seed', type=int, help='master seed')
    parser.add_argument('--trials', type=int, help='trials per cell')
    parser.add_argument('--threads', type=int, default=0, help='worker threads (0 = auto)')
    parser.add_argument('--sss-budget', type=int, dest='sss_budget',
                        help='node limit of the exact SSS search')


def build_parser():
    parser = argparse.ArgumentParser(prog='grouptest',
                                     description='Nonadaptive group testing simulations.')
    parser.add_argument('--version', action='version', version=grouptest.__version__)
    parser.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='logging level (default is WARNING)')
    parser.add_argument('--progress', action='store_true', help='print one line per cell')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    simulate = commands.add_parser('simulate', help='run a sweep from a config file')
    _add_run_flags(simulate)
    simulate.set_defaults(func=cmd_simulate)

    curves = commands.add_parser('theory-curves', help='tabulate the rate curves')
    curves.add_argument('--theta-min', type=float, default=0.01)
    curves.add_argument('--theta-max', type=float, default=0.99)
    curves.add_argument('--step', type=float, default=0.01)
    curves.add_argument('--out', help='output CSV')
    curves.set_defaults(func=cmd_theory_curves)

    coupon = commands.add_parser('coupon-check', help='check the coupon collector results')
    coupon.add_argument('--t-max', type=int, default=6)
    coupon.add_argument('--c-max', type=int, default=6)
    coupon.add_argument('--mc-trials', type=int, default=2000)
    coupon.add_argument('--mc-tests', type=int, default=1000)
    coupon.add_argument('--alpha', type=float, default=theory.LN2)
    coupon.add_argument('--epsilon', type=float, default=0.05)
    coupon.add_argument('--seed', type=int)
    coupon.set_defaults(func=cmd_coupon_check)

    comp = commands.add_parser('comp-check',
                               help='compare COMP with its conditional success formula')
    comp.add_argument('--N', type=int, default=500)
    comp.add_argument('--K', type=int, default=10)
    comp.add_argument('--T', type=int, default=100)
    comp.add_argument('--nu', type=float, default=theory.LN2)
    comp.add_argument('--trials', type=int)
    comp.add_argument('--seed', type=int)
    comp.add_argument('--threads', type=int, default=0)
    comp.set_defaults(func=cmd_comp_check)

    threshold = commands.add_parser('threshold-check',
                                    help='COMP success on either side of its threshold')
    threshold.add_argument('--N', type=int, default=10000)
    threshold.add_argument('--K', type=int, default=10)
    threshold.add_argument('--nu', type=float, default=theory.LN2)
    threshold.add_argument('--factors', type=float, nargs='+', default=[0.8, 1.2])
    threshold.add_argument('--trials', type=int)
    threshold.add_argument('--seed', type=int)
    threshold.add_argument('--threads', type=int, default=0)
    threshold.set_defaults(func=cmd_threshold_check)

    fig1 = commands.add_parser('repro-fig1', help='rate curves on a fine theta grid')
    fig1.add_argument('--out', help='output CSV')
    fig1.set_defaults(func=cmd_repro_fig1)

    fig2 = commands.add_parser('repro-fig2', help='empirical success curves, both regimes')
    _add_run_flags(fig2, config=False)
    fig2.add_argument('--bernoulli-p', choices=sorted(BERNOULLI_NU), default='ln2/K',
                      dest='bernoulli_p', help='Bernoulli comparison design')
    fig2.set_defaults(func=cmd_repro_fig2)

    return parser


def main(argv=None):
    parser = build_parser()
    opts = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, opts.log_level))

    if opts.progress:
        for state in [events.states.STARTED, events.states.FINISHED]:
            callback = functools.partial(sweep_event, 'run_sweep', state)
            events.subscribe(sim.TOPIC, 'run_sweep', callback, state)
        events.subscribe(sim.TOPIC, 'cell', cell_progress, events.states.PROGRESS)

    try:
        return opts.func(opts)
    except Exception as exc:  # pylint: disable=broad-except
        LOG.debug(traceback.format_exc())
        six.print_("Error: %s" % exc, file=sys.stderr)
        return exceptions.exit_code_for(exc)
    finally:
        if opts.progress:
            events.clear()
