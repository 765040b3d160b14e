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
Progress notifications for long-running experiments.

Library functions publish events on a topic (usually their module name);
front ends subscribe callbacks to show progress.  Nothing is published to
unless somebody listens.
"""

from collections import namedtuple
import functools
import logging
import threading

from grouptest.utils import NullHandler

LOG = logging.getLogger(__name__)
LOG.addHandler(NullHandler())

EVENT_HANDLERS = {}
_LOCK = threading.Lock()
state_list = ['ANY', 'STARTED', 'FAILED', 'FINISHED', 'PROGRESS']
states = namedtuple('EventStates', state_list)(*state_list)


def evented(topic):
    """Publish STARTED, then FINISHED or FAILED, around each call of a function.

    The event name is the function name and callbacks receive the call's
    keyword arguments, so a subscriber on 'grouptest.sim'/'run_sweep' sees
    the config that was passed in.
    """
    def decorator(function):
        @functools.wraps(function)
        def replacement(*args, **kwargs):
            publish(topic, function.__name__, states.STARTED, **kwargs)
            try:
                result = function(*args, **kwargs)
            except Exception:
                publish(topic, function.__name__, states.FAILED, **kwargs)
                raise
            publish(topic, function.__name__, states.FINISHED, **kwargs)
            return result
        return replacement
    return decorator


def publish(topic, event, event_state, **kwargs):
    """Fire the callbacks registered for topic+event+event_state.

    If nothing is registered for that exact state, the callbacks registered
    for topic+event+ANY are fired instead.  Callbacks fire in registration
    order and receive the topic plus any keyword arguments.
    """
    # short-circuit if nothing is listening
    if not EVENT_HANDLERS:
        return

    with _LOCK:
        callbacks = EVENT_HANDLERS.get(_key(topic, event, event_state))
        if callbacks is None:
            callbacks = EVENT_HANDLERS.get(_key(topic, event, states.ANY), [])
        callbacks = list(callbacks)

    for callback in callbacks:
        callback(topic, **kwargs)


def subscribe(topic, event, callback, event_state=None):
    """Register a callback for an event published on a topic."""
    if event_state is None:
        event_state = states.ANY
    if event_state not in states:
        raise ValueError("Unknown event state: %s" % event_state)

    with _LOCK:
        EVENT_HANDLERS.setdefault(_key(topic, event, event_state), []).append(callback)
    LOG.debug("Subscribed %r to %s", callback, _key(topic, event, event_state))


def clear():
    """Drop every registered callback."""
    with _LOCK:
        EVENT_HANDLERS.clear()


def _key(topic, event, event_state):
    return '.'.join([topic, event, event_state])
