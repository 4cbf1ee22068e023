import pytest

from ranklab.domain.exceptions import DomainError
from ranklab.service_layer import suites


pytestmark = pytest.mark.asyncio


async def rows_of(name, uow, seed=7, **params):
    rows = await suites.collect_rows(name, params, seed, uow, use_cache=False)
    return sorted(rows, key=lambda row: row["target"])


async def test_xgroups(in_memory_uow):
    rows = await rows_of("xgroups", in_memory_uow, l=[2], amax=2, rmax=1)
    assert len(rows) == 4
    assert all(row["passed"] for row in rows)
    assert {row["target"]: row["expected"] for row in rows}["xgroup(a=2,ell=2,r=1)"] == 3


async def test_gl_skips_ell_equal_p(in_memory_uow):
    rows = await rows_of("gl", in_memory_uow, p=[3], d=[2], l=[2, 3])
    assert [row["target"] for row in rows] == ["gl-sylow(d=2,ell=2,p=3)"]
    assert rows[0]["passed"]


async def test_qp_max(in_memory_uow):
    rows = await rows_of("qp-max", in_memory_uow, p=[3], d=[1, 2])
    assert [row["observed"] for row in rows] == [0, 1]
    assert all(row["passed"] for row in rows)


async def test_lemma_monomial_filters_pairs(in_memory_uow):
    rows = await rows_of("lemma-monomial", in_memory_uow, l=[2, 3], n=[3], k=[2], trials=10)
    assert [row["target"] for row in rows] == ["monomial(ell=3,k=2,n=3)"]
    assert rows[0]["violations"] == 0


async def test_lemma_monomial_without_any_pair(in_memory_uow):
    with pytest.raises(DomainError):
        await rows_of("lemma-monomial", in_memory_uow, l=[2], n=[3], k=[2], trials=10)


async def test_lemma_monomial_is_seeded(in_memory_uow):
    first = await rows_of("lemma-monomial", in_memory_uow, l=[2], k=[2], trials=10)
    second = await rows_of("lemma-monomial", in_memory_uow, l=[2], k=[2], trials=10)
    assert first == second


async def test_prop_key(in_memory_uow):
    rows = await rows_of("prop-key", in_memory_uow, p=[5], k=[1])
    assert len(rows) == 5
    assert all(row["passed"] for row in rows)


async def test_gl_bound(in_memory_uow):
    rows = await rows_of("gl-bound", in_memory_uow, p=[3], d=[2])
    assert [row["target"] for row in rows] == ["affine(d=2,ell=2,p=3)"]
    assert rows[0]["passed"]


async def test_sylow_sym(in_memory_uow):
    rows = await rows_of("sylow-sym", in_memory_uow, l=[2, 3], nmax=8)
    assert len(rows) == 18
    assert all(row["passed"] for row in rows)


async def test_heller_reiner(in_memory_uow):
    rows = await rows_of("heller-reiner", in_memory_uow, p=[3], k=[2], maxrank=4)
    assert rows
    assert all(row["passed"] for row in rows)


async def test_invariants_against_naive_loops(in_memory_uow):
    rows = await rows_of("invariants", in_memory_uow, pmax=20, lmax=10)
    assert len(rows) == 7 * 4
    assert all(row["passed"] for row in rows)


@pytest.mark.slow
async def test_remark_examples(in_memory_uow):
    rows = await rows_of("remark-examples", in_memory_uow, p=5)
    assert len(rows) == 4
    assert all(row["passed"] for row in rows)


@pytest.mark.slow
async def test_corpus(in_memory_uow):
    rows = await rows_of("corpus", in_memory_uow)
    assert all(row["passed"] for row in rows)


@pytest.mark.slow
async def test_ygroups(in_memory_uow):
    rows = await rows_of("ygroups", in_memory_uow, c=[3], rmax=1)
    assert [row["observed"] for row in rows] == [2, 4]


def test_single_valued_parameter():
    assert suites.as_int({"amax": [2]}, "amax") == 2
    with pytest.raises(DomainError):
        suites.as_int({"amax": [1, 2]}, "amax")
