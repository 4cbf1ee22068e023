import pytest

from typer.testing import CliRunner

from ranklab.adapters import filesystem
from ranklab.bootstrap import bootstrap
from ranklab.domain import constructions, permgroup
from ranklab.domain.model import Target
from ranklab.service_layer import unit_of_work


@pytest.fixture
def in_memory_uow():
    return unit_of_work.InMemoryUnitOfWork(tool_version="test")


@pytest.fixture
def filesystem_uow(tmp_path):
    return unit_of_work.FilesystemUnitOfWork(cache_root=tmp_path / "cache", tool_version="test")


@pytest.fixture
def groups_filesystem(tmp_path) -> filesystem.AbstractFilesystem:
    return filesystem.Filesystem(tmp_path)


@pytest.fixture
def bus(in_memory_uow, groups_filesystem):
    """The central message bus, wired to an in-memory cache."""
    return bootstrap(uow=in_memory_uow, fs=groups_filesystem)


class EventCollector:
    def __init__(self):
        self.events = []

    async def __call__(self, event):
        self.events.append(event)


@pytest.fixture
def collect(bus):
    """Subscribe a collector to one event type of the bus."""

    def subscribe(event_type) -> EventCollector:
        collector = EventCollector()
        bus.event_handlers[event_type].append(collector)
        return collector

    return subscribe


@pytest.fixture
def table():
    """Close the group of a builder target."""

    def close(builder: str, **params) -> permgroup.GroupTable:
        return permgroup.closure(constructions.build(Target(builder=builder, params=params)))

    return close


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    """Point the command line cache at a temporary directory."""
    from ranklab.config import settings

    path = tmp_path / "cli-cache"
    monkeypatch.setattr(settings, "cache_dir", path)
    return path
