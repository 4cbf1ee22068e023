import abc
import hashlib

from collections.abc import Iterable, Sequence
from datetime import datetime, timezone
from enum import Enum

import orjson

from pydantic import BaseModel, ConfigDict
from sympy import Matrix, factorint

from . import events as events_module
from .exceptions import DomainError


class Serializable(abc.ABC):
    @abc.abstractmethod
    def dict(self) -> dict:
        raise NotImplementedError


class EventsMixin(Serializable):
    """
    Record events while a handler works on a model and raise them only
    after the unit of work collected the model from a repository.
    """

    def _make_sure_recording_attributes_exists(self):
        if not hasattr(self, "_recorded_events"):
            self._recorded_events: list[tuple[Serializable, type[events_module.Event]]] = []
        if not hasattr(self, "events"):
            self.events: list[events_module.Event] = []

    def raise_recorded_events(self):
        self._make_sure_recording_attributes_exists()
        for instance, event_cls in self._recorded_events:
            self.events.append(event_cls(**instance.dict()))
        self._recorded_events = []  # really important to avoid busy looping

    def record(self, event_cls: type[events_module.Event]):
        self._make_sure_recording_attributes_exists()
        self._recorded_events.append((self, event_cls))


class Perm:
    """
    A permutation of {0, ..., degree-1} stored as its image sequence.
    Products compose left to right: (g * h)(i) = h(g(i)).
    """

    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(len(images))):
            raise DomainError(f"{images} is not a bijection of 0..{len(images) - 1}")
        self.images = images

    @classmethod
    def identity(cls, degree: int) -> "Perm":
        return cls(range(degree))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Perm") -> "Perm":
        return Perm(other.images[i] for i in self.images)

    def inverse(self) -> "Perm":
        inverse = [0] * self.degree
        for i, image in enumerate(self.images):
            inverse[image] = i
        return Perm(inverse)

    def __pow__(self, n: int) -> "Perm":
        result, base = Perm.identity(self.degree), self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            result = result * base
        return result

    def is_identity(self) -> bool:
        return all(i == image for i, image in enumerate(self.images))

    def __eq__(self, other):
        return isinstance(other, Perm) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"Perm({list(self.images)})"


class Target(BaseModel):
    """Builder name plus parameters; identifies a construction."""

    model_config = ConfigDict(frozen=True)

    builder: str
    params: dict[str, int] = {}

    def label(self) -> str:
        params = ",".join(f"{name}={value}" for name, value in sorted(self.params.items()))
        return f"{self.builder}({params})"

    def canonical(self) -> bytes:
        return orjson.dumps(self.model_dump(), option=orjson.OPT_SORT_KEYS)

    def sort_key(self) -> tuple:
        return (self.builder, tuple(sorted(self.params.items())))


class GroupSpec(Serializable):
    """A finite permutation group given by its degree and a generator list."""

    def __init__(
        self,
        *,
        degree: int,
        generators: Sequence[Perm] = (),
        name: str | None = None,
        descriptor: Target | None = None,
    ):
        if degree < 0:
            raise DomainError(f"degree={degree} must be nonnegative")
        generators = [g if isinstance(g, Perm) else Perm(g) for g in generators]
        for generator in generators:
            if generator.degree != degree:
                raise DomainError(f"generator {generator} does not have degree {degree}")
        self.degree = degree
        self.generators = generators
        self.name = name
        self.descriptor = descriptor

    def __repr__(self):
        return f"GroupSpec(name={self.name}, degree={self.degree}, generators={len(self.generators)})"

    def __eq__(self, other):
        return (
            isinstance(other, GroupSpec)
            and self.degree == other.degree
            and self.generators == other.generators
            and self.name == other.name
        )

    def dict(self):
        data = {
            "degree": self.degree,
            "generators": [list(g.images) for g in self.generators],
            "name": self.name,
        }
        if self.descriptor is not None:
            data["descriptor"] = self.descriptor.model_dump()
        return data

    def renamed(self, name: str | None = None, descriptor: Target | None = None) -> "GroupSpec":
        return GroupSpec(degree=self.degree, generators=self.generators, name=name, descriptor=descriptor)


class MatrixGroupSpec(Serializable):
    """
    A group of d×d matrices over Z/modulus, modulus a power of an odd prime
    (or of 2 for the dihedral-type models). Matrices act on row vectors.
    """

    def __init__(
        self,
        *,
        d: int,
        modulus: int,
        generators: Sequence[Sequence[Sequence[int]]] = (),
        name: str | None = None,
        descriptor: Target | None = None,
    ):
        factors = factorint(modulus)
        if d < 1 or len(factors) != 1:
            raise DomainError(f"need d ≥ 1 and a prime power modulus, got d={d}, modulus={modulus}")
        [(p, k)] = factors.items()
        normalized = []
        for matrix in generators:
            rows = tuple(tuple(int(entry) % modulus for entry in row) for row in matrix)
            if len(rows) != d or any(len(row) != d for row in rows):
                raise DomainError(f"generator {rows} is not {d}×{d}")
            normalized.append(rows)
        self.d = d
        self.modulus = modulus
        self.p = p
        self.k = k
        self.generators = normalized
        self.name = name
        self.descriptor = descriptor
        for matrix in normalized:
            if determinant_mod(matrix, p) == 0:
                raise DomainError(f"generator {matrix} is not invertible mod {p}")

    def __repr__(self):
        return f"MatrixGroupSpec(name={self.name}, d={self.d}, modulus={self.modulus})"

    def reduced(self, modulus: int) -> "MatrixGroupSpec":
        return MatrixGroupSpec(d=self.d, modulus=modulus, generators=self.generators, name=self.name)

    def dict(self):
        data = {
            "d": self.d,
            "modulus": self.modulus,
            "generators": [[entry for row in matrix for entry in row] for matrix in self.generators],
            "name": self.name,
        }
        if self.descriptor is not None:
            data["descriptor"] = self.descriptor.model_dump()
        return data


def determinant_mod(matrix: Sequence[Sequence[int]], p: int) -> int:
    """Determinant reduced into F_p."""
    return int(Matrix(matrix).det()) % p


class InvariantTriple(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    ell: int
    m: int
    a: int
    c: int | None = None


class HRMultiplicities(BaseModel):
    """Multiplicities of the trivial, Φ-quotient and free indecomposables."""

    model_config = ConfigDict(frozen=True)

    a: int
    b: int
    c: int

    def rank(self, p: int) -> int:
        return self.a + self.b * (p - 1) + self.c * p


class ReportStatus(str, Enum):
    MATCH = "Match"
    MISMATCH = "Mismatch"
    BRUTE_SKIPPED = "BruteSkipped"
    LOWER_BOUND_ONLY = "LowerBoundOnly"
    FORMULA_SKIPPED = "FormulaSkipped"


def decide_status(formula_value: int | None, brute_value: int | None, exhaustive: bool) -> ReportStatus:
    """
    Match only when both values exist, the enumeration was exhaustive and the
    values agree. A lower bound already above the formula is a mismatch.
    """
    if brute_value is None:
        return ReportStatus.BRUTE_SKIPPED
    if not exhaustive:
        if formula_value is not None and brute_value > formula_value:
            return ReportStatus.MISMATCH
        return ReportStatus.LOWER_BOUND_ONLY
    if formula_value is None:
        return ReportStatus.FORMULA_SKIPPED
    if formula_value == brute_value:
        return ReportStatus.MATCH
    return ReportStatus.MISMATCH


def cache_key(content: bytes, method: str, tool_version: str) -> str:
    """Content hash of a canonical descriptor (or group document), method and tool version."""
    payload = content + f"|{method}|{tool_version}".encode()
    return hashlib.sha256(payload).hexdigest()


class RankReport(EventsMixin):
    """
    Formula value and brute-force value of the rank of one target, with the
    witness subgroup (group file document) when the brute force ran.
    """

    def __init__(
        self,
        *,
        target: Target,
        formula_value: int | None = None,
        brute_value: int | None = None,
        witness: dict | None = None,
        status: ReportStatus | str = ReportStatus.BRUTE_SKIPPED,
        case: str | None = None,
        wall_time: float = 0.0,
        key: str = "",
        cached: bool = False,
        capped: bool = False,
    ):
        self.target = target
        self.formula_value = formula_value
        self.brute_value = brute_value
        self.witness = witness
        self.status = ReportStatus(status)
        self.case = case
        self.wall_time = wall_time
        self.key = key
        self.cached = cached
        # set when a configured cap or the default class budget shaped the result; never persisted
        self.capped = capped

    def __repr__(self):
        return f"RankReport(target={self.target.label()}, status={self.status.value})"

    def __eq__(self, other):
        return isinstance(other, RankReport) and self.comparable() == other.comparable()

    def __hash__(self):
        return hash(self.key or self.target.canonical())

    @property
    def is_failure(self) -> bool:
        return self.status == ReportStatus.MISMATCH

    def comparable(self) -> dict:
        data = self.dict()
        for volatile in ("wall_time", "cached"):
            data.pop(volatile)
        return data

    def dict(self):
        return {
            "key": self.key,
            "target": self.target.model_dump(),
            "formula_value": self.formula_value,
            "brute_value": self.brute_value,
            "witness": self.witness,
            "status": self.status.value,
            "case": self.case,
            "wall_time": self.wall_time,
            "cached": self.cached,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RankReport":
        data = dict(data)
        data["target"] = Target(**data["target"])
        return cls(**data)

    def compute(self):
        """Record computed event."""
        self.record(events_module.RankComputed)


class SuiteRun(EventsMixin):
    """A named verification suite: one row per target plus the summary."""

    def __init__(self, *, name: str, seed: int | None = None, rows: list[dict] | None = None):
        self.name = name
        self.seed = seed
        self.rows = rows or []

    def __repr__(self):
        return f"SuiteRun(name={self.name}, rows={len(self.rows)})"

    def __hash__(self):
        return hash((self.name, self.seed))

    @property
    def passed(self) -> bool:
        return all(row["passed"] for row in self.rows)

    def add_row(self, target: str, expected, observed, passed: bool, **detail):
        self.rows.append(
            {"target": target, "expected": expected, "observed": observed, "passed": bool(passed), "detail": detail}
        )

    def sorted_rows(self) -> list[dict]:
        return sorted(self.rows, key=lambda row: row["target"])

    def dict(self):
        return {"name": self.name, "seed": self.seed, "rows": self.sorted_rows(), "passed": self.passed}

    def finish(self):
        """Record finished event."""
        self.record(events_module.SuiteFinished)


class CacheEntry(Serializable):
    """Immutable cached payload keyed by target hash and tool version."""

    def __init__(self, *, key: str, payload: dict, tool_version: str, timestamp: datetime | None = None):
        self.key = key
        self.payload = payload
        self.tool_version = tool_version
        self.timestamp = timestamp or datetime.now(timezone.utc)

    def __repr__(self):
        return f"CacheEntry(key={self.key[:12]}, tool_version={self.tool_version})"

    def __eq__(self, other):
        return isinstance(other, CacheEntry) and (self.key, self.tool_version) == (other.key, other.tool_version)

    def __hash__(self):
        return hash((self.key, self.tool_version))

    def dict(self):
        return {
            "key": self.key,
            "payload": self.payload,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CacheEntry":
        return cls(
            key=data["key"],
            payload=data["payload"],
            tool_version=data["tool_version"],
            timestamp=datetime.fromisoformat(data["timestamp"]),
        )


class Outcome(EventsMixin):
    """
    A computed document (invariants, group file, table) that is handed back to
    the caller only through the event it records.
    """

    def __init__(self, event_cls: type[events_module.Event], **payload):
        self.event_cls = event_cls
        self.payload = payload

    def __repr__(self):
        return f"Outcome({self.event_cls.__name__})"

    def dict(self):
        return dict(self.payload)

    def announce(self):
        self.record(self.event_cls)
