"""
Readonly views: turn result events into the documents the command line prints.
"""
import csv
import io

import orjson

from rich.table import Table

from .domain import events


VOLATILE = ("wall_time", "cached")
DUMP_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS | orjson.OPT_APPEND_NEWLINE


def dumps(data) -> bytes:
    return orjson.dumps(data, option=DUMP_OPTIONS)


def _without(data: dict, keys) -> dict:
    return {key: value for key, value in data.items() if key not in keys}


def invariants_document(event: events.InvariantsComputed) -> dict:
    data = event.model_dump(exclude={"type"})
    if data["c"] is None:
        del data["c"]
    return data


def report_document(event: events.RankComputed, timings: bool = False) -> dict:
    data = event.model_dump(exclude={"type"})
    return data if timings else _without(data, VOLATILE)


def suite_document(event: events.SuiteFinished, timings: bool = False) -> dict:
    data = event.model_dump(exclude={"type"})
    if not timings:
        data["rows"] = [row | {"detail": _without(row["detail"], VOLATILE)} for row in data["rows"]]
    return data


def _cell(value) -> str:
    if isinstance(value, (dict, list)):
        return orjson.dumps(value, option=orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS).decode()
    return "" if value is None else str(value)


def suite_table(event: events.SuiteFinished, timings: bool = False) -> Table:
    table = Table(title=f"{event.name} (seed {event.seed})")
    table.add_column("target")
    table.add_column("expected")
    table.add_column("observed")
    table.add_column("status")
    if timings:
        table.add_column("wall time", justify="right")
    for row in event.rows:
        status = row["detail"].get("status") or ("pass" if row["passed"] else "FAIL")
        cells = [row["target"], _cell(row["expected"]), _cell(row["observed"]), status]
        if timings:
            wall_time = row["detail"].get("wall_time")
            cells.append("" if wall_time is None else f"{wall_time:.3f}s")
        table.add_row(*cells, style=None if row["passed"] else "bold red")
    return table


def suite_summary(event: events.SuiteFinished) -> str:
    failed = sum(not row["passed"] for row in event.rows)
    verdict = "PASS" if event.passed else "FAIL"
    return f"{verdict}: {len(event.rows) - failed}/{len(event.rows)} rows passed"


TABLE_HEADER = ["p", "ell", "d", "value", "case"]


def table_csv(event: events.TableBuilt) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=TABLE_HEADER, quoting=csv.QUOTE_NONE, lineterminator="\n")
    writer.writeheader()
    writer.writerows(event.rows)
    return buffer.getvalue()
