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

import hashlib
import re

import numpy as np

from grouptest.exceptions import ParameterError

try:
    from logging import NullHandler  # pylint: disable=unused-import
except ImportError:
    from logging import Handler

    class NullHandler(Handler):
        def emit(self, record):
            pass


SEED_MAX = 2 ** 64 - 1


def normalize_underscore_case(name):
    """Normalize an underscore-separated descriptor to something more readable.

    i.e. 'non_unique_smallest_set' becomes 'Non Unique Smallest Set', and
    'BUDGET_EXHAUSTED' becomes 'Budget Exhausted'
    """
    normalized = name.lower()
    normalized = re.sub(r'_(\w)',
                        lambda match: ' ' + match.group(1).upper(),
                        normalized)
    return normalized[0].upper() + normalized[1:]


def version_tuple(version):
    """Convert a version string or tuple to a tuple.

    Should be returned in the form: (major, minor, release).
    """
    if isinstance(version, str):
        return tuple(int(x) for x in version.split('.'))
    elif isinstance(version, tuple):
        return version
    else:
        raise ValueError("Invalid version: %s" % version)


def version_str(version):
    """Convert a version tuple or string to a string.

    Should be returned in the form: major.minor.release
    """
    if isinstance(version, str):
        return version
    elif isinstance(version, tuple):
        return '.'.join([str(int(x)) for x in version])
    else:
        raise ValueError("Invalid version: %s" % version)


def check_seed(seed):
    """Validate a seed and return it as a plain int in [0, 2**64)."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError("Seed must be an integer: %r" % (seed,))
    seed = int(seed)
    if seed < 0 or seed > SEED_MAX:
        raise ParameterError("Seed must fit in 64 unsigned bits: %s" % seed)
    return seed


def derive_seed(seed, *path):
    """Derive a 64-bit child seed from a parent seed and a path of integers.

    The derivation goes through numpy's SeedSequence, so children of the same
    parent with different paths are statistically independent streams, and
    the same (seed, path) always produces the same child.
    """
    sequence = np.random.SeedSequence(entropy=check_seed(seed),
                                      spawn_key=tuple(int(x) for x in path))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stable_id(label):
    """A 32-bit identifier for a text label that does not change between runs.

    Python's hash() is salted per process, so it can't be used for seeding.
    """
    digest = hashlib.sha256(label.encode('utf-8')).hexdigest()
    return int(digest[:8], 16)


def format_float(value, digits=6):
    """Fixed-precision rendering used everywhere a float reaches a CSV."""
    return '%.*f' % (digits, value)
