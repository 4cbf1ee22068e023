import logging

import pytest

from ranklab.domain import commands, events
from ranklab.domain.exceptions import DomainError


pytestmark = pytest.mark.asyncio


async def test_failing_event_handler_does_not_stop_the_others(bus, collect, caplog):
    async def broken(event):
        raise RuntimeError("observer failed")

    bus.event_handlers[events.InvariantsComputed].insert(0, broken)
    computed = collect(events.InvariantsComputed)
    with caplog.at_level(logging.ERROR):
        await bus.handle(commands.ComputeInvariants(p=5, ell=2))
    assert len(computed.events) == 1
    assert "observer failed" in caplog.text


async def test_domain_errors_are_logged_without_traceback(bus, caplog):
    with caplog.at_level(logging.INFO, logger="ranklab.service_layer.messagebus"):
        with pytest.raises(DomainError):
            await bus.handle(commands.ComputeInvariants(p=2, ell=2))
    [record] = [r for r in caplog.records if r.name == "ranklab.service_layer.messagebus"]
    assert record.levelno == logging.INFO
    assert record.exc_info is None


async def test_rejects_unknown_messages(bus):
    with pytest.raises(TypeError):
        await bus.handle("not a message")
