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
Random pooling designs.

A design is a T x N binary matrix: rows are tests, columns are items, and
x[t, i] = 1 puts item i in the pool of test t.  Two random families are
supported:

    * Bernoulli(p): every entry is an independent coin flip.
    * Constant column weight (nu): every item is put in L = nu*T/K tests,
      drawn uniformly either with replacement (so a column can have fewer
      than L distinct ones) or without replacement (exactly L ones).

Random numbers come from numpy's Philox counter-based generator keyed by
the seed.  Item i always consumes the block of stream words
[i * width, (i + 1) * width), where width is fixed by the design family
(T for Bernoulli and without-replacement, L for with-replacement).  A
column therefore depends only on (seed, column index), never on the order
in which columns are generated; see column_stream().
"""

import logging
import math

import numpy as np
import six

from grouptest import exceptions
from grouptest.utils import NullHandler, check_seed

LOG = logging.getLogger(__name__)
LOG.addHandler(NullHandler())

WITH_REPLACEMENT = 'with'
WITHOUT_REPLACEMENT = 'without'
REPLACEMENT_MODES = (WITH_REPLACEMENT, WITHOUT_REPLACEMENT)


class DesignMatrix(object):
    """An immutable T x N pooling matrix.

    The dense boolean view (tests x items) is the primary storage since all
    decoders work on it with vectorised numpy operations.  The index-set
    views are built on first use:

        design.item_tests[i] -> sorted tuple of the tests containing item i
        design.test_items[t] -> sorted tuple of the items in test t

    The two index views are exact transposes of each other.
    """

    def __init__(self, dense):
        dense = np.array(dense, dtype=bool)
        if dense.ndim != 2 or dense.shape[0] < 1 or dense.shape[1] < 1:
            raise exceptions.ParameterError(
                "A design needs at least one test and one item, got shape %s"
                % (dense.shape,))
        dense.setflags(write=False)
        self._dense = dense
        self._item_tests = None
        self._test_items = None

    @classmethod
    def from_item_tests(cls, num_tests, item_tests):
        """Build a design from the list of tests each item is placed in."""
        dense = np.zeros((num_tests, len(item_tests)), dtype=bool)
        for item, tests in enumerate(item_tests):
            for test in tests:
                if not 0 <= test < num_tests:
                    raise exceptions.ParameterError(
                        "Item %s placed in test %s, outside [0, %s)" % (item, test, num_tests))
                dense[test, item] = True
        return cls(dense)

    @classmethod
    def from_test_items(cls, num_tests, num_items, test_items):
        """Build a design from the pool of each test.

        test_items may be a list indexed by test or a dict of test -> pool.
        """
        if isinstance(test_items, dict):
            pools = six.iteritems(test_items)
        else:
            pools = enumerate(test_items)

        dense = np.zeros((num_tests, num_items), dtype=bool)
        for test, items in pools:
            if not 0 <= test < num_tests:
                raise exceptions.ParameterError(
                    "Test %s outside [0, %s)" % (test, num_tests))
            for item in items:
                if not 0 <= item < num_items:
                    raise exceptions.ParameterError(
                        "Test %s contains item %s, outside [0, %s)" % (test, item, num_items))
                dense[test, item] = True
        return cls(dense)

    @classmethod
    def from_text(cls, text):
        """Parse the debugging format written by to_text()."""
        lines = text.strip('\n').split('\n')
        try:
            num_tests, num_items = [int(x) for x in lines[0].split()]
            item_tests = [[int(x) for x in line.split()] for line in lines[1:]]
        except (ValueError, IndexError):
            raise exceptions.ParameterError("Malformed design text")
        # trailing items in no test produce empty lines that strip() removed
        item_tests.extend([] for _ in range(num_items - len(item_tests)))
        if len(item_tests) != num_items:
            raise exceptions.ParameterError(
                "Header declares %s items but %s lines follow" % (num_items, len(item_tests)))
        return cls.from_item_tests(num_tests, item_tests)

    @property
    def num_tests(self):
        return self._dense.shape[0]

    @property
    def num_items(self):
        return self._dense.shape[1]

    @property
    def dense(self):
        """Read-only boolean array of shape (num_tests, num_items)."""
        return self._dense

    @property
    def item_tests(self):
        if self._item_tests is None:
            self._item_tests = tuple(
                tuple(int(t) for t in np.flatnonzero(column)) for column in self._dense.T
            )
        return self._item_tests

    @property
    def test_items(self):
        if self._test_items is None:
            self._test_items = tuple(
                tuple(int(i) for i in np.flatnonzero(row)) for row in self._dense
            )
        return self._test_items

    def column_weights(self):
        """Number of distinct tests each item is placed in."""
        return self._dense.sum(axis=0)

    def ones(self):
        return int(self._dense.sum())

    def to_text(self):
        """First line "T N", then one line per item with its sorted tests."""
        lines = ["%d %d" % (self.num_tests, self.num_items)]
        for tests in self.item_tests:
            lines.append(' '.join(str(t) for t in tests))
        return '\n'.join(lines) + '\n'

    def tobytes(self):
        return np.packbits(self._dense).tobytes()

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return (self._dense.shape == other.dense.shape
                and bool(np.array_equal(self._dense, other.dense)))

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    __hash__ = None

    def __repr__(self):
        return "DesignMatrix(T=%d, N=%d, ones=%d)" % (self.num_tests, self.num_items, self.ones())


class DesignSpec(object):
    """Base class for the two random design families."""
    kind = None

    def to_dict(self):
        raise NotImplementedError("'to_dict' must be defined by subclasses")

    def params(self, num_defectives):
        """Human-readable parameters, resolved for K, as written to CSV."""
        raise NotImplementedError("'params' must be defined by subclasses")

    def generate(self, num_items, num_tests, num_defectives, seed):
        raise NotImplementedError("'generate' must be defined by subclasses")

    @property
    def sort_key(self):
        return (self.kind, repr(sorted(self.to_dict().items())))

    @classmethod
    def from_dict(cls, data):
        """Build a spec from its config-file form.

        {"type": "bernoulli", "p": 0.05}
        {"type": "bernoulli", "nu": 0.693}
        {"type": "ccw", "nu": 0.693, "replacement": "with"}
        """
        if not isinstance(data, dict):
            raise exceptions.ConfigError('designs', "each design must be an object")
        data = dict(data)
        kind = data.pop('type', None)
        if kind not in DESIGN_TYPES:
            raise exceptions.ConfigError('designs.type', "unknown design type %r" % (kind,))
        spec_class = DESIGN_TYPES[kind]
        for key in data:
            if key not in spec_class.config_keys:
                raise exceptions.ConfigError('designs.%s' % key,
                                             "not a %s design parameter" % kind)
        try:
            return spec_class(**data)
        except exceptions.ParameterError as exc:
            raise exceptions.ConfigError('designs', exc.message)
        except TypeError as exc:
            raise exceptions.ConfigError('designs', str(exc))

    def __eq__(self, other):
        return isinstance(other, DesignSpec) and self.sort_key == other.sort_key

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.sort_key)

    def __repr__(self):
        return "%s(%s)" % (self.__class__.__name__,
                           ', '.join('%s=%r' % kv for kv in sorted(self.to_dict().items())
                                     if kv[0] != 'type'))


class BernoulliSpec(DesignSpec):
    """Each item joins each test independently with probability p.

    The probability can be fixed (p) or given per defective (nu), in which
    case p = nu / K is resolved when K is known.  p = ln(2)/K matches the
    mean tests-per-defective of the constant column weight design with
    nu = ln 2; p = 1/K is the COMP-optimal choice for Bernoulli designs.
    """
    kind = 'bernoulli'
    config_keys = ('p', 'nu')

    def __init__(self, p=None, nu=None):
        if (p is None) == (nu is None):
            raise exceptions.ParameterError("Give exactly one of p or nu for a Bernoulli design")
        if p is not None and not 0 < p < 1:
            raise exceptions.ParameterError("Bernoulli p must lie in (0, 1): %s" % p)
        if nu is not None and not nu > 0:
            raise exceptions.ParameterError("Bernoulli nu must be positive: %s" % nu)
        self.p = None if p is None else float(p)
        self.nu = None if nu is None else float(nu)

    def probability(self, num_defectives):
        if self.p is not None:
            return self.p
        p = self.nu / num_defectives
        if not 0 < p < 1:
            raise exceptions.ParameterError(
                "nu/K = %s/%s is not a probability" % (self.nu, num_defectives))
        return p

    def to_dict(self):
        if self.p is not None:
            return {'type': self.kind, 'p': self.p}
        return {'type': self.kind, 'nu': self.nu}

    def params(self, num_defectives):
        p = self.probability(num_defectives)
        if self.nu is not None:
            return "nu=%.6f;p=%.6f" % (self.nu, p)
        return "p=%.6f" % p

    def generate(self, num_items, num_tests, num_defectives, seed):
        return generate_bernoulli(num_items, num_tests, self.probability(num_defectives), seed)


class ConstantColumnWeightSpec(DesignSpec):
    """Each item joins L = round(nu * T / K) tests chosen uniformly."""
    kind = 'ccw'
    config_keys = ('nu', 'replacement')

    def __init__(self, nu, replacement=WITH_REPLACEMENT):
        if not nu > 0:
            raise exceptions.ParameterError("Column weight nu must be positive: %s" % nu)
        if replacement not in REPLACEMENT_MODES:
            raise exceptions.ParameterError(
                "Replacement mode must be one of %s: %r" % (REPLACEMENT_MODES, replacement))
        self.nu = float(nu)
        self.replacement = replacement

    def to_dict(self):
        return {'type': self.kind, 'nu': self.nu, 'replacement': self.replacement}

    def params(self, num_defectives):
        return "nu=%.6f;replacement=%s" % (self.nu, self.replacement)

    def generate(self, num_items, num_tests, num_defectives, seed):
        weight = column_weight(self, num_tests, num_defectives)
        return generate_ccw(num_items, num_tests, weight, self.replacement, seed)


DESIGN_TYPES = {
    BernoulliSpec.kind: BernoulliSpec,
    ConstantColumnWeightSpec.kind: ConstantColumnWeightSpec,
}


def _check_counts(num_items, num_tests):
    for name, value in (('N', num_items), ('T', num_tests)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise exceptions.ParameterError("%s must be a positive integer: %r" % (name, value))


def _uniforms(seed, rows, width):
    """Row i holds stream words [i * width, (i + 1) * width) as uniforms in [0, 1)."""
    generator = np.random.Generator(np.random.Philox(np.random.SeedSequence(check_seed(seed))))
    return generator.random((rows, width))


def column_stream(seed, column, width):
    """The uniforms consumed by one column, computed on their own.

    This replays the stream up to the column, so it is only meant for
    checking that generation is order independent, not for speed.
    """
    return _uniforms(seed, column + 1, width)[column]


def generate_bernoulli(num_items, num_tests, p, seed):
    """Each entry is an independent Bernoulli(p) draw."""
    _check_counts(num_items, num_tests)
    if not 0 < p < 1:
        raise exceptions.ParameterError("Bernoulli p must lie in (0, 1): %s" % p)

    draws = _uniforms(seed, num_items, num_tests)
    return DesignMatrix((draws < p).T)


def column_weight(spec, num_tests, num_defectives):
    """L = max(1, round(nu * T / K)), rounding halves away from zero."""
    if not isinstance(spec, ConstantColumnWeightSpec):
        raise exceptions.UsageError("Column weight only applies to constant column weight "
                                    "designs, not %r" % (spec,))
    if num_tests < 1 or num_defectives < 1:
        raise exceptions.ParameterError("Need T >= 1 and K >= 1, got T=%s K=%s"
                                        % (num_tests, num_defectives))
    exact = spec.nu * num_tests / num_defectives
    weight = max(1, int(math.floor(exact + 0.5)))
    LOG.debug("Column weight for nu=%s T=%s K=%s: %s -> %s",
              spec.nu, num_tests, num_defectives, exact, weight)
    return weight


def generate_ccw(num_items, num_tests, weight, replacement, seed):
    """Place every item in `weight` tests drawn uniformly at random.

    With replacement the distinct draws become the item's tests, so a column
    can end up lighter than `weight`.  Without replacement every column has
    exactly `weight` ones.
    """
    _check_counts(num_items, num_tests)
    if isinstance(weight, bool) or not isinstance(weight, (int, np.integer)) or weight < 1:
        raise exceptions.ParameterError("Column weight must be a positive integer: %r"
                                        % (weight,))
    if replacement not in REPLACEMENT_MODES:
        raise exceptions.ParameterError("Unknown replacement mode: %r" % (replacement,))

    dense = np.zeros((num_tests, num_items), dtype=bool)
    columns = np.repeat(np.arange(num_items), weight)

    if replacement == WITH_REPLACEMENT:
        draws = _uniforms(seed, num_items, weight)
        tests = np.minimum((draws * num_tests).astype(np.int64), num_tests - 1)
    else:
        if weight > num_tests:
            raise exceptions.ParameterError(
                "Cannot pick %s distinct tests out of %s" % (weight, num_tests))
        # the `weight` smallest of T iid keys index a uniform weight-subset
        keys = _uniforms(seed, num_items, num_tests)
        tests = np.argpartition(keys, weight - 1, axis=1)[:, :weight]

    dense[tests.ravel(), columns] = True
    return DesignMatrix(dense)


def generate(spec, num_items, num_tests, num_defectives, seed):
    """Draw a design from any DesignSpec."""
    if not isinstance(spec, DesignSpec):
        raise exceptions.UsageError("Not a design spec: %r" % (spec,))
    return spec.generate(num_items, num_tests, num_defectives, seed)
