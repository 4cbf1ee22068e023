import orjson
import pytest

from ranklab.config import settings
from ranklab.domain.model import ReportStatus, Target
from ranklab.service_layer import suites, unit_of_work


pytestmark = pytest.mark.asyncio


TARGET = Target(builder="ygroup", params={"c": 3, "r": 0})


async def test_second_lookup_is_served_from_disk(filesystem_uow):
    first = await suites.cached_report(filesystem_uow, target=TARGET)
    path = filesystem_uow.reports.path_for(first.key)
    assert path.exists()
    assert path.parent.name == first.key[:2]
    second = await suites.cached_report(filesystem_uow, target=TARGET)
    assert second.cached
    assert second == first


async def test_cache_entries_are_immutable(filesystem_uow):
    report = await suites.cached_report(filesystem_uow, target=TARGET)
    path = filesystem_uow.reports.path_for(report.key)
    before = path.read_bytes()
    report.brute_value = 99
    await filesystem_uow.reports.add(report)
    assert path.read_bytes() == before


async def test_tool_version_change_misses_cache(filesystem_uow, tmp_path):
    report = await suites.cached_report(filesystem_uow, target=TARGET)
    newer = unit_of_work.FilesystemUnitOfWork(cache_root=filesystem_uow.cache_root, tool_version="newer")
    assert await newer.reports.get(report.key) is None
    again = await suites.cached_report(newer, target=TARGET)
    assert again.key != report.key
    assert not again.cached


async def test_method_and_budget_are_part_of_the_key(in_memory_uow):
    both = await suites.cached_report(in_memory_uow, target=TARGET)
    formula = await suites.cached_report(in_memory_uow, target=TARGET, method="formula")
    budgeted = await suites.cached_report(in_memory_uow, target=TARGET, budget=1000)
    assert len({both.key, formula.key, budgeted.key}) == 3


async def test_unreadable_entry_is_ignored(filesystem_uow):
    report = await suites.cached_report(filesystem_uow, target=TARGET)
    filesystem_uow.reports.path_for(report.key).write_bytes(b"{broken")
    assert await filesystem_uow.reports.get(report.key) is None


async def test_cache_entry_layout(filesystem_uow):
    report = await suites.cached_report(filesystem_uow, target=TARGET)
    entry = orjson.loads(filesystem_uow.reports.path_for(report.key).read_bytes())
    assert entry["tool_version"] == "test"
    assert entry["payload"]["status"] == "Match"
    assert entry["payload"]["target"] == {"builder": "ygroup", "params": {"c": 3, "r": 0}}


async def test_report_skipped_at_a_cap_is_not_cached(filesystem_uow, monkeypatch):
    monkeypatch.setattr(settings, "multiplication_table_cap", 4)
    skipped = await suites.cached_report(filesystem_uow, target=TARGET)
    assert skipped.status == ReportStatus.BRUTE_SKIPPED
    assert not filesystem_uow.reports.path_for(skipped.key).exists()

    monkeypatch.setattr(settings, "multiplication_table_cap", 2**13)
    again = await suites.cached_report(filesystem_uow, target=TARGET)
    assert again.status == ReportStatus.MATCH
    assert not again.cached


async def test_lower_bound_from_the_default_class_budget_is_not_cached(filesystem_uow, monkeypatch):
    monkeypatch.setattr(settings, "class_budget", 1)
    bounded = await suites.cached_report(filesystem_uow, target=TARGET)
    assert bounded.status == ReportStatus.LOWER_BOUND_ONLY
    assert not filesystem_uow.reports.path_for(bounded.key).exists()


async def test_lower_bound_from_an_explicit_budget_is_cached(filesystem_uow):
    bounded = await suites.cached_report(filesystem_uow, target=TARGET, budget=1)
    assert bounded.status == ReportStatus.LOWER_BOUND_ONLY
    assert filesystem_uow.reports.path_for(bounded.key).exists()
