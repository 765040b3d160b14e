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

import itertools
import math

import numpy as np
import pytest

from grouptest import designs, exceptions, model


def small_design():
    return designs.DesignMatrix.from_test_items(3, 4, {0: [0, 1], 1: [1, 2], 2: [2, 3]})


@pytest.mark.parametrize("defectives,bits,positives", [
    (set(), [0, 0, 0], 0),
    ({1}, [1, 1, 0], 2),
    ({0}, [1, 0, 0], 1),
    ({0, 3}, [1, 0, 1], 2),
])
def test_compute_outcomes(defectives, bits, positives):
    outcomes = model.compute_outcomes(small_design(), defectives)
    assert outcomes.to_list() == bits
    assert outcomes.positive_count == positives
    assert list(outcomes.positive_tests) == [t for t, b in enumerate(bits) if b]
    assert list(outcomes.negative_tests) == [t for t, b in enumerate(bits) if not b]


@pytest.mark.parametrize("defectives", [{4}, {-1}, {0, 7}])
def test_compute_outcomes_out_of_range(defectives):
    pytest.raises(exceptions.ParameterError, model.compute_outcomes, small_design(), defectives)


def test_outcomes_union_and_monotonicity():
    design = designs.generate_bernoulli(12, 8, 0.25, seed=4)
    items = range(design.num_items)
    for first, second in itertools.combinations(itertools.combinations(items, 2), 2):
        a = model.compute_outcomes(design, first).bits
        b = model.compute_outcomes(design, second).bits
        union = model.compute_outcomes(design, set(first) | set(second)).bits
        assert np.array_equal(union, a | b)
        assert np.all(a <= union)


def test_sample_all_items():
    instance = model.sample_defective_set(5, 5, seed=1)
    assert instance.defective_set == frozenset(range(5))
    assert instance.num_defectives == 5


def test_sample_no_items():
    instance = model.sample_defective_set(10, 0, seed=1)
    assert instance.defective_set == frozenset()


def test_sample_deterministic():
    assert model.sample_defective_set(100, 7, 3) == model.sample_defective_set(100, 7, 3)


def test_sample_uniform_pairs():
    draws = 3000
    counts = dict((pair, 0) for pair in itertools.combinations(range(4), 2))
    for seed in range(draws):
        instance = model.sample_defective_set(4, 2, seed)
        counts[tuple(sorted(instance.defective_set))] += 1

    expected = draws / 6.0
    sigma = math.sqrt(draws * (1 / 6.0) * (5 / 6.0))
    for pair, count in counts.items():
        assert abs(count - expected) <= 5 * sigma, (pair, count)


@pytest.mark.parametrize("num_items,num_defectives", [(3, 4), (3, -1), (-1, 0)])
def test_sample_bad_counts(num_items, num_defectives):
    pytest.raises(exceptions.ParameterError, model.sample_defective_set,
                  num_items, num_defectives, 0)


def test_problem_instance_validates():
    pytest.raises(exceptions.ParameterError, model.ProblemInstance, 3, [3])
    instance = model.ProblemInstance(3, [2, 0])
    assert instance.defective_set == frozenset([0, 2])
    assert instance == model.ProblemInstance(3, (0, 2))
    assert instance != model.ProblemInstance(4, (0, 2))


def test_problem_instance_outcomes():
    instance = model.ProblemInstance(4, [1])
    assert instance.outcomes(small_design()).to_list() == [1, 1, 0]
    pytest.raises(exceptions.ParameterError, model.ProblemInstance(5, [1]).outcomes,
                  small_design())


def test_outcome_vector():
    outcomes = model.OutcomeVector([1, 0, 1])
    assert outcomes.num_tests == 3
    assert model.OutcomeVector.from_bits(outcomes) is outcomes
    assert model.OutcomeVector.from_bits([True, False, True]) == outcomes
    assert outcomes != model.OutcomeVector([1, 1, 1])
    with pytest.raises(ValueError):
        outcomes.bits[0] = False
