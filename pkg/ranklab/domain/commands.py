from pathlib import Path
from typing import Literal

from pydantic import BaseModel


class Command(BaseModel):
    pass


class ComputeInvariants(Command):
    p: int
    ell: int


class BuildGroup(Command):
    builder: str
    params: dict[str, int]
    out: Path | None = None


class ComputeRank(Command):
    path: Path
    method: Literal["brute", "formula", "both"] = "both"
    budget: int | None = None
    use_cache: bool = True


class RunSuite(Command):
    name: str
    params: dict[str, int | list[int]] = {}
    seed: int | None = None
    use_cache: bool = True


class BuildTable(Command):
    ps: list[int]
    ells: list[int]
    ds: list[int]
