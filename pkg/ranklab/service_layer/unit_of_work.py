from __future__ import annotations

import abc

from pathlib import Path

from ..adapters import repository
from ..config import settings


class AbstractUnitOfWork(abc.ABC):
    reports: repository.AbstractReportRepository
    outcomes: repository.AbstractOutcomeRepository

    async def __aenter__(self) -> AbstractUnitOfWork:
        return self

    async def __aexit__(self, *args):
        await self.rollback()

    async def commit(self):
        await self._commit()

    def collect_new_events(self):
        for repo in [self.reports, self.outcomes]:
            for model in repo.seen:
                model.raise_recorded_events()
                while model.events:
                    yield model.events.pop(0)

    @abc.abstractmethod
    async def _commit(self):
        raise NotImplementedError

    @abc.abstractmethod
    async def rollback(self):
        raise NotImplementedError


class FilesystemUnitOfWork(AbstractUnitOfWork):
    """
    Reports go to the on-disk cache as soon as they are added; every write
    is atomic on its own, so commit and rollback have nothing left to do.
    """

    def __init__(self, cache_root: Path | None = None, tool_version: str | None = None):
        self.cache_root = cache_root or settings.cache_root
        self.tool_version = tool_version or settings.tool_version
        self.reports = repository.FilesystemReportRepository(self.cache_root, self.tool_version)
        self.outcomes = repository.InMemoryOutcomeRepository()

    async def _commit(self):
        pass

    async def rollback(self):
        pass


class InMemoryUnitOfWork(AbstractUnitOfWork):
    def __init__(self, tool_version: str | None = None):
        self.reports = repository.InMemoryReportRepository(tool_version or settings.tool_version)
        self.outcomes = repository.InMemoryOutcomeRepository()
        self.committed = False

    async def _commit(self):
        self.committed = True

    async def rollback(self):
        pass
