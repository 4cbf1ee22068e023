import numpy as np
import pytest

from ranklab.domain import constructions, permgroup
from ranklab.domain.exceptions import CapExceeded, NotPrimePower
from ranklab.domain.model import GroupSpec, Perm


def test_closure_orders(table):
    assert table("symmetric", n=4).order == 24
    assert table("semidihedral", c=3).order == 16
    assert table("sylow-sym", n=4, ell=2).order == 8
    assert table("xgroup", ell=2, a=2, r=1).order == 32


def test_identity_is_element_zero(table):
    G = table("symmetric", n=3)
    assert G.perm(0).is_identity()
    assert G.mul[0].tolist() == list(range(G.order))


def test_multiplication_matches_perm_product(table):
    G = table("dihedral", k=2)
    for i, j in [(1, 2), (3, 5), (7, 4)]:
        assert G.perm(int(G.mul[i, j])) == G.perm(i) * G.perm(j)


def test_closure_cap():
    with pytest.raises(CapExceeded) as excinfo:
        permgroup.closure(constructions.symmetric(5), cap=50)
    assert excinfo.value.partial_count > 50


def test_trivial_group_has_one_element():
    G = permgroup.closure(GroupSpec(degree=3, generators=[]))
    assert G.order == 1
    assert permgroup.rank(G).value == 0


def test_center_of_semidihedral_has_order_two(table):
    assert permgroup.center(table("semidihedral", c=3)).order == 2


def test_derived_subgroup_of_symmetric(table):
    assert permgroup.derived_subgroup(table("symmetric", n=4)).order == 12


def test_d_frattini(table):
    assert permgroup.d_frattini(table("semidihedral", c=3), 2) == 2
    assert permgroup.d_frattini(table("xgroup", ell=2, a=2, r=1), 2) == 2
    assert permgroup.d_frattini(table("iterated-wreath", ell=3, r=1), 3) == 1


def test_d_frattini_needs_an_ell_group(table):
    with pytest.raises(NotPrimePower):
        permgroup.d_frattini(table("symmetric", n=3), 2)


def test_d_search_on_non_prime_power_groups(table):
    assert permgroup.d_search(table("symmetric", n=4)) == 2
    assert permgroup.d_search(table("cyclic", n=6)) == 1


def test_subgroup_classes_of_symmetric_four(table):
    classes = permgroup.subgroup_classes(table("symmetric", n=4))
    assert classes.exhaustive
    assert len(classes) == 11
    assert classes.total == 30


def test_subgroup_classes_of_dihedral_eight(table):
    classes = permgroup.subgroup_classes(table("dihedral", k=2))
    assert len(classes) == 8
    assert classes.total == 10


def test_subgroup_class_budget_gives_partial_list(table):
    G = table("dihedral", k=2)
    result = permgroup.rank(G, budget=2)
    assert not result.exhaustive


def test_rank_and_witness(table):
    result = permgroup.rank(table("xgroup", ell=2, a=2, r=1))
    assert result.value == 3
    assert result.exhaustive
    witness = result.witness_spec()
    assert len(witness.generators) == 3
    assert permgroup.closure(witness).order == result.witness.order


def test_rank_of_symmetric_four(table):
    assert permgroup.rank(table("symmetric", n=4)).value == 2


def test_sylow_subgroups(table):
    G = table("symmetric", n=4)
    assert permgroup.sylow(G, 2).order == 8
    assert permgroup.sylow(G, 3).order == 3
    assert permgroup.sylow(G, 5).order == 1


def test_omega1(table):
    assert permgroup.omega1(table("cyclic", n=9), 3).order == 3
    # the involutions of SD16 generate a dihedral group of order 8
    assert permgroup.omega1(table("semidihedral", c=3), 2).order == 8


def test_agemo_of_cyclic(table):
    assert permgroup.agemo(table("cyclic", n=8), 2).order == 4


def test_nilpotency_class(table):
    assert permgroup.nilpotency_class(table("cyclic", n=4)) == 1
    assert permgroup.nilpotency_class(table("dihedral", k=2)) == 2
    assert permgroup.nilpotency_class(table("semidihedral", c=3)) == 3


def test_d_maximal(table):
    elementary = permgroup.closure(constructions.direct_product(constructions.cyclic(3), constructions.cyclic(3)))
    assert permgroup.is_d_maximal(elementary)
    assert not permgroup.is_d_maximal(table("cyclic", n=9))


def test_element_orders(table):
    orders = table("cyclic", n=6).element_orders
    assert sorted(np.unique(orders).tolist()) == [1, 2, 3, 6]


def test_index_of_round_trip(table):
    G = table("symmetric", n=3)
    transposition = Perm([1, 0, 2])
    assert G.perm(G.index_of(transposition)) == transposition


ELL_GROUPS = [
    ("semidihedral", {"c": 3}, 2),
    ("dihedral", {"k": 2}, 2),
    ("xgroup", {"ell": 2, "a": 2, "r": 1}, 2),
    ("iterated-wreath", {"ell": 2, "r": 2}, 2),
    ("sylow-sym", {"n": 6, "ell": 2}, 2),
    ("gl-sylow", {"d": 2, "p": 5, "ell": 2}, 2),
    ("iterated-wreath", {"ell": 3, "r": 2}, 3),
    ("abelian", {"ell": 3, "a": 2, "b": 1}, 3),
    ("heisenberg", {"p": 3}, 3),
    ("abelian", {"ell": 5, "a": 1, "b": 1}, 5),
]


@pytest.mark.parametrize("builder, params, ell", ELL_GROUPS)
def test_d_frattini_agrees_with_generating_search(table, builder, params, ell):
    G = table(builder, **params)
    assert permgroup.d_frattini(G, ell) == permgroup.d_search(G)


@pytest.mark.parametrize("builder, params, ell", ELL_GROUPS)
def test_omega1_is_normal(table, builder, params, ell):
    G = table(builder, **params)
    members = np.array([G.index_of(row.tolist()) for row in permgroup.omega1(G, ell).elements])
    for g in G.generator_indices:
        assert set(G.conjugate_indices(members, g).tolist()) == set(members.tolist())


@pytest.mark.parametrize(
    "left, right",
    [
        (constructions.cyclic(2), constructions.cyclic(2)),
        (constructions.cyclic(4), constructions.cyclic(6)),
        (constructions.dihedral_model(2), constructions.cyclic(3)),
        (constructions.symmetric(3), constructions.symmetric(3)),
        (constructions.semidihedral(3), constructions.cyclic(2)),
    ],
)
def test_rank_is_subadditive_on_direct_products(left, right):
    product = permgroup.rank(permgroup.closure(constructions.direct_product(left, right))).value
    assert product <= permgroup.rank(permgroup.closure(left)).value + permgroup.rank(permgroup.closure(right)).value


@pytest.mark.parametrize("ell, r", [(2, 0), (2, 1), (2, 2), (3, 0), (3, 1)])
def test_xgroup_with_a_one_is_the_next_iterated_wreath(table, ell, r):
    x = table("xgroup", ell=ell, a=1, r=r)
    w = table("iterated-wreath", ell=ell, r=r + 1)
    assert x.order == w.order
    assert permgroup.d_frattini(x, ell) == permgroup.d_frattini(w, ell)
    assert permgroup.rank(x).value == permgroup.rank(w).value


@pytest.mark.parametrize("ell, exponents", [(2, (1, 1, 1)), (3, (1, 1, 0)), (5, (1, 0, 0))])
def test_rank_of_elementary_abelian_is_its_dimension(table, ell, exponents):
    a, b, c = exponents
    assert permgroup.rank(table("abelian", ell=ell, a=a, b=b, c=c)).value == sum(exponents)
