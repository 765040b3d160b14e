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
Detection algorithms for noiseless nonadaptive group testing.

Every decoder takes a design and the observed outcomes and returns either
an Estimate of the defective set or a DeclaredError.  A decode succeeds
when the estimate equals the true defective set exactly.

The possible defectives (PD) are the items that appear in no negative
test; everything else is definitely non-defective.

    COMP   declares every PD item defective.
    DD     declares defective the PD items that are the only PD member of
           some positive test.
    SCOMP  starts from DD and greedily adds the PD item explaining the most
           still-unexplained positive tests until all are explained.
    SSS    finds the smallest satisfying set, if it is unique.
"""

from collections import namedtuple, OrderedDict
import logging

import numpy as np

from grouptest import exceptions
from grouptest.model import OutcomeVector, compute_outcomes
from grouptest.utils import NullHandler

LOG = logging.getLogger(__name__)
LOG.addHandler(NullHandler())

DEFAULT_SSS_BUDGET = 10 ** 7

reason_list = ['non_unique_smallest_set', 'budget_exhausted', 'no_satisfying_set']
reasons = namedtuple('ErrorReasons', reason_list)(*reason_list)

Estimate = namedtuple('Estimate', ['items'])
DeclaredError = namedtuple('DeclaredError', ['reason'])


def _estimate(items):
    return Estimate(frozenset(int(i) for i in items))


def _check_shape(design, outcomes):
    outcomes = OutcomeVector.from_bits(outcomes)
    if outcomes.num_tests != design.num_tests:
        raise exceptions.ParameterError(
            "Outcome vector has %s tests, design has %s" % (outcomes.num_tests, design.num_tests))
    return outcomes


def _possible_defective_items(design, outcomes):
    """Sorted array of the items that appear in no negative test."""
    negative = ~outcomes.bits
    if not negative.any():
        return np.arange(design.num_items)
    eliminated = design.dense[negative].any(axis=0)
    return np.flatnonzero(~eliminated)


def _sole_members(pools):
    """Column positions that are the only member of some row of `pools`."""
    if pools.shape[1] == 0:
        return np.zeros(0, dtype=np.int64)
    sole = pools.sum(axis=1) == 1
    if not sole.any():
        return np.zeros(0, dtype=np.int64)
    return np.unique(pools[sole].argmax(axis=1))


def possible_defectives(design, outcomes):
    """Items in no negative test, including items that are in no test at all."""
    outcomes = _check_shape(design, outcomes)
    return frozenset(int(i) for i in _possible_defective_items(design, outcomes))


def decode_comp(design, outcomes):
    outcomes = _check_shape(design, outcomes)
    return _estimate(_possible_defective_items(design, outcomes))


def decode_dd(design, outcomes):
    outcomes = _check_shape(design, outcomes)
    candidates = _possible_defective_items(design, outcomes)
    pools = design.dense[outcomes.bits][:, candidates]
    return _estimate(candidates[_sole_members(pools)])


def decode_scomp(design, outcomes):
    outcomes = _check_shape(design, outcomes)
    candidates = _possible_defective_items(design, outcomes)
    pools = design.dense[outcomes.bits][:, candidates]

    chosen = list(_sole_members(pools))
    explained = pools[:, chosen].any(axis=1)
    while not explained.all():
        scores = pools[~explained].sum(axis=0)
        if not scores.size or scores.max() == 0:
            # only reachable for outcomes the noiseless model can't produce
            return DeclaredError(reasons.no_satisfying_set)
        # argmax returns the first maximum, i.e. the lowest item index
        best = int(scores.argmax())
        chosen.append(best)
        explained |= pools[:, best]

    return _estimate(candidates[chosen])


def is_satisfying(design, outcomes, candidate):
    """True when `candidate` as the defective set reproduces the outcomes exactly."""
    outcomes = _check_shape(design, outcomes)
    return compute_outcomes(design, candidate) == outcomes


def _popcount(value):
    return bin(value).count('1')


def _bitmasks(matrix):
    """One python int per row of a boolean matrix, bit j set when column j is."""
    if matrix.shape[1] == 0:
        return [0] * matrix.shape[0]
    packed = np.packbits(matrix, axis=1, bitorder='little')
    return [int.from_bytes(row.tobytes(), 'little') for row in packed]


class SmallestSatisfyingSetSearch(object):
    """Branch and bound for the minimum covers of the positive tests.

    Only PD items are considered: an item in a negative test would turn that
    test positive, so it can't belong to any satisfying set.  Conversely a
    set of PD items is satisfying exactly when it covers every positive
    test, which turns SSS into a minimum set cover over the positive tests.

    Items that are the only PD member of some positive test belong to every
    satisfying set and are committed before the search starts.

    Each node picks the uncovered test with the fewest available items and
    branches on which item covers it, banning the items of earlier branches.
    The branches partition the covers, so every cover is reached at most
    once and counting the leaves of minimum size decides uniqueness.  The
    greedy cover gives the starting upper bound; the lower bound is a set of
    uncovered tests with pairwise disjoint available items.
    """

    def __init__(self, pools, budget=DEFAULT_SSS_BUDGET):
        self.budget = budget
        self.nodes = 0
        num_tests, num_items = pools.shape
        self.all_tests = (1 << num_tests) - 1
        # tests covered by each item, and items covering each test
        self.item_masks = _bitmasks(pools.T)
        self.test_masks = _bitmasks(pools)
        self.best_size = None
        self.best_set = None
        self.count = 0

    def run(self):
        """Return (size, set, count) for the minimum covers; count is capped at 2."""
        if any(mask == 0 for mask in self.test_masks):
            return None, None, 0

        forced = [j for j in range(len(self.item_masks))
                  if any(mask == 1 << j for mask in self.test_masks)]
        covered = 0
        for j in forced:
            covered |= self.item_masks[j]

        self.best_size = len(forced) + len(self._greedy(covered))
        self._search(forced, covered, 0)
        LOG.debug("SSS search: %s nodes, minimum %s, %s forced, count %s",
                  self.nodes, self.best_size, len(forced), self.count)
        return self.best_size, self.best_set, self.count

    def _greedy(self, covered):
        added = []
        while covered != self.all_tests:
            uncovered = self.all_tests & ~covered
            gains = [_popcount(mask & uncovered) for mask in self.item_masks]
            best = max(range(len(gains)), key=lambda j: (gains[j], -j))
            added.append(best)
            covered |= self.item_masks[best]
        return added

    def _bound(self, uncovered, banned):
        """Lower bound on the items still needed, and the test to branch on.

        Returns (None, None) when some uncovered test has no available item.
        """
        options = []
        test = 0
        while uncovered:
            if uncovered & 1:
                available = self.test_masks[test] & ~banned
                if not available:
                    return None, None
                options.append((_popcount(available), test, available))
            uncovered >>= 1
            test += 1

        options.sort()
        bound = 0
        used = 0
        for _, _, available in options:
            if not available & used:
                bound += 1
                used |= available
        return bound, options[0][2]

    def _search(self, chosen, covered, banned):
        self.nodes += 1
        if self.nodes > self.budget:
            raise exceptions.BudgetExhausted(self.budget)

        if covered == self.all_tests:
            size = len(chosen)
            # the bound only prunes by a lower estimate, so larger leaves get here
            if size > self.best_size:
                return
            if size < self.best_size or self.best_set is None:
                self.best_size = size
                self.best_set = frozenset(chosen)
                self.count = 1
            elif size == self.best_size:
                self.count += 1
            return

        bound, available = self._bound(self.all_tests & ~covered, banned)
        if bound is None:
            return

        item = 0
        while available:
            if available & 1:
                # a second cover of the best size can't change the answer,
                # only a strictly smaller one can
                limit = self.best_size if self.count < 2 else self.best_size - 1
                if len(chosen) + bound > limit:
                    return
                self._search(chosen + [item], covered | self.item_masks[item], banned)
                banned |= 1 << item
            available >>= 1
            item += 1


def decode_sss(design, outcomes, budget=DEFAULT_SSS_BUDGET):
    outcomes = _check_shape(design, outcomes)
    candidates = _possible_defective_items(design, outcomes)
    pools = design.dense[outcomes.bits][:, candidates]

    search = SmallestSatisfyingSetSearch(pools, budget=budget)
    try:
        size, best, count = search.run()
    except exceptions.BudgetExhausted as exc:
        LOG.debug("SSS declared an error: %s", exc)
        return DeclaredError(reasons.budget_exhausted)

    if count == 0:
        return DeclaredError(reasons.no_satisfying_set)
    if count > 1:
        return DeclaredError(reasons.non_unique_smallest_set)
    return _estimate(candidates[sorted(best)])


DECODERS = OrderedDict([
    ('COMP', decode_comp),
    ('DD', decode_dd),
    ('SCOMP', decode_scomp),
    ('SSS', decode_sss),
])


def decode(name, design, outcomes, sss_budget=DEFAULT_SSS_BUDGET):
    """Run a decoder by its registry name."""
    if name not in DECODERS:
        raise exceptions.ParameterError("Unknown decoder %r, expected one of %s"
                                        % (name, list(DECODERS)))
    if name == 'SSS':
        return decode_sss(design, outcomes, budget=sss_budget)
    return DECODERS[name](design, outcomes)


def is_success(result, defectives):
    """Exact recovery; declared errors always count as failures."""
    return isinstance(result, Estimate) and result.items == frozenset(defectives)
