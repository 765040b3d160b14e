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

from mock import MagicMock
import pytest

from grouptest import events


@pytest.fixture(autouse=True)
def clean_handlers():
    events.clear()
    yield
    events.clear()


def test_publish_without_listeners():
    events.publish('topic', 'event', events.states.STARTED, value=1)


def test_publish_exact_state():
    started = MagicMock()
    finished = MagicMock()
    events.subscribe('topic', 'event', started, events.states.STARTED)
    events.subscribe('topic', 'event', finished, events.states.FINISHED)

    events.publish('topic', 'event', events.states.STARTED, value=1)
    started.assert_called_once_with('topic', value=1)
    assert finished.call_count == 0


def test_publish_falls_back_to_any():
    callback = MagicMock()
    events.subscribe('topic', 'event', callback)
    events.publish('topic', 'event', events.states.PROGRESS, index=3)
    callback.assert_called_once_with('topic', index=3)


def test_subscribe_unknown_state():
    pytest.raises(ValueError, events.subscribe, 'topic', 'event', MagicMock(), 'DONE')


def test_evented_success():
    callback = MagicMock()
    events.subscribe('topic', 'work', callback)

    @events.evented('topic')
    def work(value=None):
        return value * 2

    assert work(value=21) == 42
    assert callback.call_count == 2, "expected STARTED and FINISHED"


def test_evented_failure():
    failed = MagicMock()
    finished = MagicMock()
    events.subscribe('topic', 'work', failed, events.states.FAILED)
    events.subscribe('topic', 'work', finished, events.states.FINISHED)

    @events.evented('topic')
    def work():
        raise RuntimeError("boom")

    pytest.raises(RuntimeError, work)
    assert failed.call_count == 1
    assert finished.call_count == 0
