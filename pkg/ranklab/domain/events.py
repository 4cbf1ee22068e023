from typing import Any, Literal

from pydantic import BaseModel


EVENT_TYPES = Literal["invariants", "group", "rank", "suite", "table"]


class Event(BaseModel):
    type: str


class InvariantsComputed(Event):
    type: EVENT_TYPES = "invariants"
    p: int
    ell: int
    m: int
    a: int
    c: int | None = None


class GroupBuilt(Event):
    type: EVENT_TYPES = "group"
    name: str | None
    degree: int
    generators: list[list[int]]
    descriptor: dict | None = None
    document: bytes


class RankComputed(Event):
    type: EVENT_TYPES = "rank"
    key: str
    target: dict
    formula_value: int | None
    brute_value: int | None
    witness: dict | None = None
    status: str
    case: str | None = None
    wall_time: float = 0.0
    cached: bool = False


class SuiteFinished(Event):
    type: EVENT_TYPES = "suite"
    name: str
    seed: int | None
    rows: list[dict[str, Any]]
    passed: bool


class TableBuilt(Event):
    type: EVENT_TYPES = "table"
    rows: list[dict[str, Any]]
