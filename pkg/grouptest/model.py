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
The noiseless group testing model: a uniformly random defective set, and a
test is positive exactly when its pool holds at least one defective.
"""

import logging

import numpy as np

from grouptest import exceptions
from grouptest.utils import NullHandler, check_seed

LOG = logging.getLogger(__name__)
LOG.addHandler(NullHandler())


class ProblemInstance(object):
    """N items, of which the members of defective_set are defective."""

    def __init__(self, num_items, defective_set):
        defective_set = frozenset(int(i) for i in defective_set)
        if num_items < 0:
            raise exceptions.ParameterError("Item count must be non-negative: %s" % num_items)
        if any(not 0 <= i < num_items for i in defective_set):
            raise exceptions.ParameterError(
                "Defective set %s is not inside [0, %s)" % (sorted(defective_set), num_items))
        self.num_items = num_items
        self.defective_set = defective_set

    @property
    def num_defectives(self):
        return len(self.defective_set)

    def outcomes(self, design):
        """The outcomes this instance produces on a design."""
        if design.num_items != self.num_items:
            raise exceptions.ParameterError(
                "Design has %s items, instance has %s" % (design.num_items, self.num_items))
        return compute_outcomes(design, self.defective_set)

    def __eq__(self, other):
        return (isinstance(other, ProblemInstance)
                and self.num_items == other.num_items
                and self.defective_set == other.defective_set)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.num_items, self.defective_set))

    def __repr__(self):
        return "ProblemInstance(N=%d, defectives=%s)" % (self.num_items,
                                                         sorted(self.defective_set))


class OutcomeVector(object):
    """Test outcomes y_t in {0, 1}, with M the number of positive tests."""

    def __init__(self, bits):
        bits = np.array(bits, dtype=bool).ravel()
        bits.setflags(write=False)
        self._bits = bits

    @classmethod
    def from_bits(cls, bits):
        """Accept an OutcomeVector as-is, or wrap any 0/1 sequence."""
        if isinstance(bits, cls):
            return bits
        return cls(bits)

    @property
    def bits(self):
        return self._bits

    @property
    def num_tests(self):
        return self._bits.shape[0]

    @property
    def positive_count(self):
        return int(self._bits.sum())

    @property
    def positive_tests(self):
        return np.flatnonzero(self._bits)

    @property
    def negative_tests(self):
        return np.flatnonzero(~self._bits)

    def to_list(self):
        return [int(b) for b in self._bits]

    def __eq__(self, other):
        if not isinstance(other, OutcomeVector):
            return NotImplemented
        return bool(np.array_equal(self._bits, other.bits))

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    __hash__ = None

    def __repr__(self):
        return "OutcomeVector(%s, M=%d)" % (''.join(str(b) for b in self.to_list()),
                                            self.positive_count)


def sample_defective_set(num_items, num_defectives, seed):
    """A uniformly random K-subset of [0, N), determined by the seed."""
    if num_items < 0 or not 0 <= num_defectives <= num_items:
        raise exceptions.ParameterError("Need 0 <= K <= N, got N=%s K=%s"
                                        % (num_items, num_defectives))
    generator = np.random.default_rng(check_seed(seed))
    chosen = generator.choice(num_items, size=num_defectives, replace=False)
    return ProblemInstance(num_items, chosen)


def compute_outcomes(design, defectives):
    """y_t = 1 exactly when test t contains some defective item."""
    defectives = np.fromiter(sorted(int(i) for i in defectives), dtype=np.int64)
    if defectives.size and (defectives[0] < 0 or defectives[-1] >= design.num_items):
        raise exceptions.ParameterError(
            "Defective items %s outside [0, %s)" % (defectives.tolist(), design.num_items))
    if not defectives.size:
        return OutcomeVector(np.zeros(design.num_tests, dtype=bool))
    return OutcomeVector(design.dense[:, defectives].any(axis=1))
