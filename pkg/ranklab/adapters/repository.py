import abc
import logging

from pathlib import Path

import orjson

from ..domain import model
from .filesystem import atomic_write


logger = logging.getLogger(__name__)


class AbstractReportRepository(abc.ABC):
    """
    Result cache for RankReports, keyed by content hash. Reports handed out or
    stored are tracked in `seen` so the unit of work can collect their events.
    """

    def __init__(self, tool_version: str):
        self.tool_version = tool_version
        self.seen: set[model.RankReport] = set()

    async def add(self, report: model.RankReport) -> None:
        await self._add(model.CacheEntry(key=report.key, payload=report.dict(), tool_version=self.tool_version))
        self.track(report)

    async def get(self, key: str) -> model.RankReport | None:
        entry = await self._get(key)
        if entry is None or entry.key != key or entry.tool_version != self.tool_version:
            return None
        report = model.RankReport.from_dict(entry.payload)
        report.cached = True
        self.track(report)
        return report

    def track(self, report: model.RankReport) -> None:
        """Follow a report for event collection, replacing an equal one seen earlier."""
        self.seen.discard(report)
        self.seen.add(report)

    @abc.abstractmethod
    async def _add(self, entry: model.CacheEntry) -> None:
        raise NotImplementedError

    @abc.abstractmethod
    async def _get(self, key: str) -> model.CacheEntry | None:
        raise NotImplementedError


class FilesystemReportRepository(AbstractReportRepository):
    def __init__(self, root: Path, tool_version: str):
        self.root = root
        super().__init__(tool_version)

    def path_for(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    async def _add(self, entry):
        path = self.path_for(entry.key)
        if path.exists():
            return
        atomic_write(path, orjson.dumps(entry.dict()))

    async def _get(self, key):
        path = self.path_for(key)
        try:
            return model.CacheEntry.from_dict(orjson.loads(path.read_bytes()))
        except FileNotFoundError:
            return None
        except (orjson.JSONDecodeError, KeyError, TypeError, ValueError):
            logger.warning("ignoring unreadable cache entry %s", path)
            return None


class InMemoryReportRepository(AbstractReportRepository):
    def __init__(self, tool_version: str):
        self._entries: dict[str, model.CacheEntry] = {}
        super().__init__(tool_version)

    async def _add(self, entry):
        self._entries.setdefault(entry.key, entry)

    async def _get(self, key):
        return self._entries.get(key)


class AbstractOutcomeRepository(abc.ABC):
    """Suite runs and other computed outcomes of the current unit of work."""

    def __init__(self):
        self.seen: set[model.EventsMixin] = set()

    async def add(self, outcome: model.EventsMixin) -> None:
        await self._add(outcome)
        self.seen.add(outcome)

    @abc.abstractmethod
    async def _add(self, outcome: model.EventsMixin) -> None:
        raise NotImplementedError


class InMemoryOutcomeRepository(AbstractOutcomeRepository):
    def __init__(self):
        self._outcomes: list[model.EventsMixin] = []
        super().__init__()

    async def _add(self, outcome):
        self._outcomes.append(outcome)
