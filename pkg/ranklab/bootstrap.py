import inspect

from pathlib import Path

from .adapters import filesystem
from .service_layer import handlers, messagebus, unit_of_work


def bootstrap(
    uow: unit_of_work.AbstractUnitOfWork | None = None,
    fs: filesystem.AbstractFilesystem | None = None,
) -> messagebus.MessageBus:
    if uow is None:
        uow = unit_of_work.FilesystemUnitOfWork()

    if fs is None:
        fs = filesystem.Filesystem(Path.cwd())

    dependencies = {"uow": uow, "fs": fs}

    injected_event_handlers = {
        event_type: [inject_dependencies(handler, dependencies) for handler in event_handlers]
        for event_type, event_handlers in handlers.EVENT_HANDLERS.items()
    }
    injected_command_handlers = {
        command_type: inject_dependencies(handler, dependencies)
        for command_type, handler in handlers.COMMAND_HANDLERS.items()
    }

    return messagebus.MessageBus(
        fs=fs,
        uow=uow,
        event_handlers=injected_event_handlers,
        command_handlers=injected_command_handlers,
    )


def inject_dependencies(handler, dependencies):
    params = inspect.signature(handler).parameters
    deps = {name: dependency for name, dependency in dependencies.items() if name in params}
    return lambda message: handler(message, **deps)


def get_bus_for_cli(use_cache: bool = True) -> messagebus.MessageBus:
    """Filesystem cache when caching is on, a throwaway in-memory one otherwise."""
    uow = unit_of_work.FilesystemUnitOfWork() if use_cache else unit_of_work.InMemoryUnitOfWork()
    return bootstrap(uow=uow)
