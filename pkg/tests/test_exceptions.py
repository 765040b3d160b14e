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

import json

import pytest

from grouptest import exceptions


@pytest.mark.parametrize("exc,expected", [
    (exceptions.GroupTestError(), 1),
    (exceptions.ParameterError("bad N"), 2),
    (exceptions.UsageError(), 2),
    (exceptions.ConfigError('trials', "need at least one trial"), 2),
    (exceptions.BudgetExhausted(100), 1),
    (ValueError("nope"), 1),
    (json.JSONDecodeError("Expecting value", '{"N": ', 6), 2),
    (RuntimeError("boom"), 1),
    (IOError("missing"), 1),
])
def test_exit_code_for(exc, expected):
    assert exceptions.exit_code_for(exc) == expected


def test_exit_code_for_json():
    try:
        json.loads('{"N": ')
    except ValueError as exc:
        assert exceptions.exit_code_for(exc) == exceptions.EXIT_USAGE


def test_default_message():
    assert str(exceptions.ParameterError()) == 'Invalid parameter'
    assert str(exceptions.ParameterError("K > N")) == 'K > N'


def test_config_error_names_key():
    exc = exceptions.ConfigError('T_values', "need a non-empty list of test counts")
    assert exc.key == 'T_values'
    assert "'T_values'" in str(exc)
    assert isinstance(exc, exceptions.ParameterError)


def test_budget_exhausted():
    exc = exceptions.BudgetExhausted(500)
    assert exc.budget == 500
    assert '500' in str(exc)


@pytest.mark.parametrize("cause,expected", [
    (exceptions.ParameterError("L > T"), 2),
    (RuntimeError("boom"), 1),
])
def test_cell_error(cause, expected):
    exc = exceptions.CellError("N=500 K=10 T=60", cause)
    assert exc.cause is cause
    assert exc.exit_code == expected
    assert 'N=500 K=10 T=60' in str(exc)
    assert str(cause) in str(exc)
