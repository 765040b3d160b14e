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
Defines all the exceptions raised by the group testing toolkit.

Each exception knows the exit code the command-line front end should use
when it escapes to the top level.
"""

import json

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class GroupTestError(Exception):
    """
    The base exception class for all exceptions this library raises.
    """
    message = 'Unknown Error'
    exit_code = EXIT_FAILURE

    def __init__(self, message=None):
        self.message = message or self.__class__.message
        super(GroupTestError, self).__init__(self.message)

    def __str__(self):
        return self.message


class ParameterError(GroupTestError):
    """
    A parameter is outside its valid range, or two inputs disagree in shape.
    """
    message = 'Invalid parameter'
    exit_code = EXIT_USAGE


class UsageError(GroupTestError):
    """
    An operation was called on an object it does not apply to.
    """
    message = 'Invalid usage'
    exit_code = EXIT_USAGE


class ConfigError(ParameterError):
    """
    An experiment definition failed validation.  The offending key is kept
    so the command line can name it.
    """
    message = 'Invalid configuration'

    def __init__(self, key, message=None):
        self.key = key
        super(ConfigError, self).__init__(message)

    def __str__(self):
        return "Invalid config key '%s': %s" % (self.key, self.message)


class BudgetExhausted(GroupTestError):
    """
    The smallest-satisfying-set search ran out of nodes before it could
    certify an optimal and unique answer.
    """
    message = 'Search node budget exhausted'

    def __init__(self, budget, message=None):
        self.budget = budget
        super(BudgetExhausted, self).__init__(message)

    def __str__(self):
        return "Gave up after %s nodes: %s" % (self.budget, self.message)


class CellError(GroupTestError):
    """
    Evaluating one cell of a sweep failed.  Wraps the original error.
    """
    message = 'Cell evaluation failed'

    def __init__(self, cell, cause, message=None):
        self.cell = cell
        self.cause = cause
        super(CellError, self).__init__(message or str(cause))

    @property
    def exit_code(self):
        return exit_code_for(self.cause)

    def __str__(self):
        return "Failure in cell %s: %s" % (self.cell, self.message)


def exit_code_for(exc):
    """
    Given any exception, return the exit code the command line should use.
    """
    if isinstance(exc, GroupTestError):
        return exc.exit_code
    if isinstance(exc, json.JSONDecodeError):
        return EXIT_USAGE
    return EXIT_FAILURE
