import numpy as np
import pytest

from ranklab.domain import arith, constructions, permgroup
from ranklab.domain.exceptions import CapExceeded, DomainError
from ranklab.domain.model import Target


def order_of(spec) -> int:
    return permgroup.closure(spec).order


def test_xgroup_file_shape():
    spec = constructions.xgroup(2, 2, 1)
    assert spec.degree == 8
    assert len(spec.generators) == 3


def test_semidihedral_relations():
    spec = constructions.semidihedral(3)
    x, y = spec.generators
    assert (x * x).is_identity()
    assert (y**8).is_identity()
    assert not (y**4).is_identity()
    # y^x = y^{-(1 + 4)} = y^3
    assert x.inverse() * y * x == y**3


def test_semidihedral_needs_c_at_least_three():
    with pytest.raises(DomainError):
        constructions.semidihedral(2)


@pytest.mark.parametrize("ell, r", [(2, 0), (2, 1), (2, 3), (3, 2)])
def test_iterated_wreath_order(ell, r):
    spec = constructions.iterated_wreath(ell, r)
    assert spec.degree == ell**r
    assert order_of(spec) == arith.wreath_order(ell, r)


@pytest.mark.parametrize("n", [0, 1, 4, 6, 9])
@pytest.mark.parametrize("ell", [2, 3])
def test_sylow_sym_order_is_legendre(n, ell):
    spec = constructions.sylow_sym(n, ell)
    assert order_of(spec) == ell ** arith.sylow_sym_valuation(n, ell)
    assert spec.degree == max(n, 1)


def test_ygroup_order():
    assert order_of(constructions.ygroup(3, 0)) == 16


def test_direct_product_degrees_add():
    spec = constructions.direct_product(constructions.cyclic(2), constructions.cyclic(3))
    assert spec.degree == 5
    assert order_of(spec) == 6


def test_general_linear_order():
    assert order_of(constructions.matrix_to_perm(constructions.general_linear(2, 3))) == 48


@pytest.mark.parametrize("d, p, ell", [(2, 5, 2), (2, 3, 2), (2, 5, 3), (3, 3, 2), (1, 7, 3)])
def test_gl_sylow_matrix_order(d, p, ell):
    group = constructions.gl_sylow_matrix(d, p, ell)
    expected = ell ** arith.vp(arith.gl_order(d, p), ell)
    assert order_of(constructions.matrix_to_perm(group)) == expected


def test_gl_sylow_rejects_ell_equal_p():
    with pytest.raises(DomainError):
        constructions.gl_sylow_matrix(2, 5, 5)


def test_gl_sylow_three_mod_four_is_semidihedral():
    G = permgroup.closure(constructions.matrix_to_perm(constructions.gl_sylow_matrix(2, 3, 2)))
    assert G.order == 16
    assert permgroup.center(G).order == 2
    assert permgroup.nilpotency_class(G) == 3


def test_matrix_to_perm_cap():
    with pytest.raises(CapExceeded):
        constructions.matrix_to_perm(constructions.general_linear(3, 5), cap=100)


def test_remark_s_group_is_irreducible_of_order_sixteen():
    group = constructions.remark_s_group(5)
    assert not constructions.has_invariant_line(group)
    G = permgroup.closure(constructions.matrix_to_perm(group))
    assert G.order == 16
    assert permgroup.d_frattini(G, 2) == 3


def test_scalar_group_has_invariant_line():
    group = constructions.gl_sylow_matrix(2, 5, 3)
    assert constructions.has_invariant_line(constructions.general_linear(1, 5))
    assert not constructions.has_invariant_line(group)


def test_remark_affine_order():
    spec = constructions.remark_affine(3, 2, 2, 2)
    assert order_of(spec) == 2 * 81


def test_remark_affine_needs_m_dividing_p_minus_one():
    with pytest.raises(DomainError):
        constructions.remark_affine(5, 3, 1, 1)


def test_dihedral_power_order():
    assert order_of(constructions.dihedral_power(2, 2)) == 64


def test_qp_max_p_group():
    assert order_of(constructions.qp_max_p_group(3, 4)) == 9
    assert order_of(constructions.qp_max_p_group(5, 3)) == 1


def test_build_embeds_descriptor():
    spec = constructions.build(Target(builder="sylow-sym", params={"n": 4, "ell": 2}))
    assert spec.degree == 4
    assert spec.descriptor == Target(builder="sylow-sym", params={"n": 4, "ell": 2})
    assert spec.name == "sylow-sym(ell=2,n=4)"


def test_build_fills_defaults():
    spec = constructions.build(Target(builder="remark-s", params={"p": 5}))
    assert spec.descriptor.params == {"p": 5, "k": 1}


def test_build_rejects_unknown_builder_and_params():
    with pytest.raises(DomainError):
        constructions.build(Target(builder="nope"))
    with pytest.raises(DomainError):
        constructions.build(Target(builder="cyclic", params={"n": 3, "r": 1}))


def test_build_matrix_only_for_matrix_builders():
    group = constructions.build_matrix(Target(builder="gl", params={"d": 2, "p": 3}))
    assert group.d == 2
    with pytest.raises(DomainError):
        constructions.build_matrix(Target(builder="cyclic", params={"n": 3}))


def test_vectors_are_base_digits():
    points = constructions.vectors(2, 3)
    assert points.shape == (9, 2)
    assert points[5].tolist() == [2, 1]
    assert np.unique(points, axis=0).shape[0] == 9


def test_abelian_drops_zero_exponents():
    spec = constructions.abelian(3, 2, 0, 1)
    assert spec.name == "C9xC3"
    assert spec.degree == 12
    assert permgroup.closure(spec).order == 27
    assert constructions.abelian(5, 0).degree == 1
    with pytest.raises(DomainError):
        constructions.abelian(4, 1)


def test_heisenberg_is_extraspecial():
    G = permgroup.closure(constructions.build(Target(builder="heisenberg", params={"p": 3})))
    assert G.order == 27
    assert permgroup.center(G).order == 3
    assert permgroup.derived_subgroup(G).order == 3
    with pytest.raises(DomainError):
        constructions.heisenberg(2)


def test_gl_sylow_three_mod_four_blocks_for_larger_c():
    # c(7, 2) = 4, so the block is semidihedral of order 32
    assert order_of(constructions.matrix_to_perm(constructions.gl_sylow_matrix(2, 7, 2))) == 2 ** (arith.depth_c(7) + 1)
