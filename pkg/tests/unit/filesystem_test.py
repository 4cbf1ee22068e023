from pathlib import Path

import orjson
import pytest

from ranklab.adapters.filesystem import InMemoryFilesystem, atomic_write, dumps_group, loads_group
from ranklab.domain import constructions
from ranklab.domain.exceptions import DomainError
from ranklab.domain.model import GroupSpec, MatrixGroupSpec, Target


def test_group_file_is_compact_with_trailing_newline():
    document = dumps_group(constructions.cyclic(3))
    assert document == b'{"degree":3,"generators":[[1,2,0]],"name":"C3"}\n'


def test_group_file_keeps_descriptor():
    spec = constructions.build(Target(builder="sylow-sym", params={"n": 4, "ell": 2}))
    restored = loads_group(dumps_group(spec))
    assert isinstance(restored, GroupSpec)
    assert restored.descriptor == spec.descriptor
    assert dumps_group(restored) == dumps_group(spec)


def test_matrix_file_generators_are_row_major():
    group = constructions.gl_sylow_matrix(2, 3, 2)
    data = orjson.loads(dumps_group(group))
    assert data["modulus"] == 3
    assert len(data["generators"][0]) == 4
    restored = loads_group(dumps_group(group))
    assert isinstance(restored, MatrixGroupSpec)
    assert restored.generators == group.generators


@pytest.mark.parametrize("document", [b"not json", b"[]", b'{"generators": []}', b'{"degree": 2, "generators": 3}'])
def test_malformed_group_file(document):
    with pytest.raises(DomainError):
        loads_group(document)


def test_atomic_write_replaces_file(tmp_path):
    path = tmp_path / "nested" / "group.json"
    atomic_write(path, b"first")
    atomic_write(path, b"second")
    assert path.read_bytes() == b"second"
    assert [p.name for p in path.parent.iterdir()] == ["group.json"]


def test_filesystem_write_and_read_group(groups_filesystem):
    spec = constructions.semidihedral(3)
    document = groups_filesystem.write_group(Path("sd16.json"), spec)
    assert (groups_filesystem.root / "sd16.json").read_bytes() == document
    restored, raw = groups_filesystem.read_group(Path("sd16.json"))
    assert raw == document
    assert restored.generators == spec.generators


def test_missing_group_file(groups_filesystem):
    with pytest.raises(DomainError):
        groups_filesystem.read_group(Path("missing.json"))


def test_in_memory_filesystem_resolves_relative_paths():
    fs = InMemoryFilesystem(Path("/groups"))
    fs.write_group(Path("c2.json"), constructions.cyclic(2))
    assert Path("/groups/c2.json") in fs.files
    assert fs.read_group(Path("/groups/c2.json"))[0].degree == 2
