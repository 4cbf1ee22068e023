import logging

from collections import deque
from typing import Callable, Union

from ..adapters import filesystem
from ..domain import commands, events
from ..domain.exceptions import RankLabError
from . import unit_of_work


logger = logging.getLogger(__name__)

Message = Union[commands.Command, events.Event]


class MessageBus:
    """
    Runs one command and every event it leads to, in order.

    Errors from the command handler propagate to the caller. RankLabError is
    an expected outcome and logged without a traceback. Event handlers only
    observe, so their failures are logged and skipped.
    """

    def __init__(
        self,
        fs: filesystem.AbstractFilesystem,
        uow: unit_of_work.AbstractUnitOfWork,
        event_handlers: dict[type[events.Event], list[Callable]],
        command_handlers: dict[type[commands.Command], Callable],
    ):
        self.fs = fs
        self.uow = uow
        self.event_handlers = event_handlers
        self.command_handlers = command_handlers
        self.queue: deque[Message] = deque()

    async def handle(self, message: Message):
        self.queue.append(message)
        while self.queue:
            message = self.queue.popleft()
            if isinstance(message, events.Event):
                await self.handle_event(message)
            elif isinstance(message, commands.Command):
                await self.handle_command(message)
            else:
                raise TypeError(f"{message!r} is neither an event nor a command")

    async def handle_event(self, event: events.Event):
        for handler in self.event_handlers.get(type(event), []):
            try:
                await handler(event)
            except Exception:
                logger.exception("handler %s failed on %s", handler, event.type)
                continue
            self.queue.extend(self.uow.collect_new_events())

    async def handle_command(self, command: commands.Command):
        handler = self.command_handlers.get(type(command))
        if handler is None:
            raise TypeError(f"no handler for {type(command).__name__}")
        logger.debug("handling %s", command)
        try:
            await handler(command)
        except RankLabError as error:
            logger.info("%s rejected: %s", type(command).__name__, error)
            raise
        except Exception:
            logger.exception("unexpected failure handling %s", command)
            raise
        self.queue.extend(self.uow.collect_new_events())
