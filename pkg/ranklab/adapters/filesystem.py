import abc
import contextlib
import os
import tempfile

from pathlib import Path

import orjson

from ..domain.exceptions import DomainError
from ..domain.model import GroupSpec, MatrixGroupSpec, Target


def dumps_group(spec: GroupSpec | MatrixGroupSpec) -> bytes:
    """Canonical group file: compact JSON, keys in construction order, trailing newline."""
    return orjson.dumps(spec.dict(), option=orjson.OPT_APPEND_NEWLINE)


def loads_group(document: bytes | str) -> GroupSpec | MatrixGroupSpec:
    try:
        data = orjson.loads(document)
    except orjson.JSONDecodeError as error:
        raise DomainError(f"group file is not valid JSON: {error}") from None
    if not isinstance(data, dict):
        raise DomainError("group file is not a JSON object")
    descriptor = data.get("descriptor")
    try:
        if descriptor is not None:
            descriptor = Target(**descriptor)
        if "modulus" in data:
            d = int(data["d"])
            generators = [[flat[row * d : (row + 1) * d] for row in range(d)] for flat in data["generators"]]
            return MatrixGroupSpec(
                d=d, modulus=int(data["modulus"]), generators=generators, name=data.get("name"), descriptor=descriptor
            )
        return GroupSpec(
            degree=int(data["degree"]),
            generators=data.get("generators", []),
            name=data.get("name"),
            descriptor=descriptor,
        )
    except (KeyError, TypeError) as error:
        raise DomainError(f"malformed group file: {error!r}") from None


def atomic_write(path: Path, content: bytes) -> None:
    """Write to a temporary file next to path, then rename it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(content)
        os.replace(temporary, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(temporary)
        raise


class AbstractFilesystem(abc.ABC):
    def __init__(self, root: Path):
        self.root = root

    def resolve(self, path: Path) -> Path:
        return path if path.is_absolute() else self.root / path

    @abc.abstractmethod
    def read_bytes(self, path: Path) -> bytes:
        raise NotImplementedError  # pragma: no cover

    @abc.abstractmethod
    def write_bytes(self, path: Path, content: bytes) -> None:
        raise NotImplementedError  # pragma: no cover

    def read_group(self, path: Path) -> tuple[GroupSpec | MatrixGroupSpec, bytes]:
        """The parsed group and the raw document it came from."""
        document = self.read_bytes(path)
        return loads_group(document), document

    def write_group(self, path: Path, spec: GroupSpec | MatrixGroupSpec) -> bytes:
        document = dumps_group(spec)
        self.write_bytes(path, document)
        return document


class Filesystem(AbstractFilesystem):
    def read_bytes(self, path):
        try:
            return self.resolve(path).read_bytes()
        except FileNotFoundError:
            raise DomainError(f"group file {path} does not exist") from None

    def write_bytes(self, path, content):
        atomic_write(self.resolve(path), content)


class InMemoryFilesystem(AbstractFilesystem):
    def __init__(self, root: Path = Path("/")):
        super().__init__(root)
        self.files: dict[Path, bytes] = {}

    def read_bytes(self, path):
        try:
            return self.files[self.resolve(path)]
        except KeyError:
            raise DomainError(f"group file {path} does not exist") from None

    def write_bytes(self, path, content):
        self.files[self.resolve(path)] = content
