"""
Builders for the concrete groups: cyclic, semidihedral and iterated wreath
products, Sylow subgroups of symmetric and general linear groups, and the
small example groups used as rank witnesses. Permutation builders return a
GroupSpec, matrix builders a MatrixGroupSpec acting on row vectors.
"""
import itertools
import math

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from sympy import n_order
from sympy.ntheory import primitive_root
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p, gf_pow_mod, gf_strip

from ..config import settings
from . import arith
from .exceptions import CapExceeded, DomainError, VerificationMismatch
from .model import GroupSpec, MatrixGroupSpec, Perm, Target


def trivial(degree: int = 1) -> GroupSpec:
    return GroupSpec(degree=degree, generators=[], name="trivial")


def cyclic(n: int) -> GroupSpec:
    if n < 1:
        raise DomainError(f"n={n} must be at least 1")
    generators = [Perm((i + 1) % n for i in range(n))] if n > 1 else []
    return GroupSpec(degree=n, generators=generators, name=f"C{n}")


def semidihedral(c: int) -> GroupSpec:
    """
    Regular representation of SD_{2^{c+1}} = <x, y | x² = y^{2^c} = 1, y^x = y^k>
    with k = −(1 + 2^{c−1}). Point e·2^c + j stands for x^e·y^j; generators act
    by right multiplication, using y^j·x = x·y^{jk}.
    """
    if c < 3:
        raise DomainError(f"semidihedral groups need c ≥ 3, got c={c}")
    size = 2**c
    k = -(1 + 2 ** (c - 1)) % size
    x = [((e + 1) % 2) * size + (j * k) % size for e in range(2) for j in range(size)]
    y = [e * size + (j + 1) % size for e in range(2) for j in range(size)]
    return GroupSpec(degree=2 * size, generators=[Perm(x), Perm(y)], name=f"SD{2 * size}")


def wreath(base: GroupSpec, top: GroupSpec) -> GroupSpec:
    """
    Permutational wreath product on deg(base)·deg(top) points. Point i·b + j is
    point j of block i; every block gets its own copy of the base generators
    and the top generators permute whole blocks.
    """
    b, t = base.degree, top.degree
    generators = []
    for block in range(t):
        for g in base.generators:
            images = list(range(b * t))
            images[block * b : (block + 1) * b] = [block * b + image for image in g.images]
            generators.append(Perm(images))
    for tau in top.generators:
        generators.append(Perm(tau.images[i] * b + j for i in range(t) for j in range(b)))
    return GroupSpec(degree=b * t, generators=generators, name=f"({base.name})wr({top.name})")


def direct_product(*specs: GroupSpec) -> GroupSpec:
    degree = sum(spec.degree for spec in specs)
    generators, offset = [], 0
    for spec in specs:
        for g in spec.generators:
            images = list(range(degree))
            images[offset : offset + spec.degree] = [offset + image for image in g.images]
            generators.append(Perm(images))
        offset += spec.degree
    return GroupSpec(degree=degree, generators=generators, name="x".join(f"({spec.name})" for spec in specs))


def iterated_wreath(ell: int, r: int) -> GroupSpec:
    """W_r(ℓ) = C_ℓ ≀ ⋯ ≀ C_ℓ on ℓ^r points; W_0 is trivial on one point."""
    arith.require_prime(ell, "ell")
    if r < 0:
        raise DomainError(f"r={r} must be nonnegative")
    spec = trivial()
    for _ in range(r):
        spec = wreath(cyclic(ell), spec)
    return spec.renamed(name=f"W{r}({ell})")


def xgroup(ell: int, a: int, r: int) -> GroupSpec:
    """X_{a,r}(ℓ) = C_{ℓ^a} ≀ W_r(ℓ)."""
    if a < 1:
        raise DomainError(f"a={a} must be at least 1")
    return wreath(cyclic(ell**a), iterated_wreath(ell, r)).renamed(name=f"X{a},{r}({ell})")


def ygroup(c: int, r: int) -> GroupSpec:
    """Y_{c,r} = SD_{2^{c+1}} ≀ W_r(2)."""
    return wreath(semidihedral(c), iterated_wreath(2, r)).renamed(name=f"Y{c},{r}")


def sylow_sym(n: int, ell: int) -> GroupSpec:
    """
    Sylow ℓ-subgroup of Sym(n): n_i copies of W_i(ℓ) for the ℓ-adic digits n_i
    of n, blocks in increasing i, then the n_0 fixed points.
    """
    if n < 0:
        raise DomainError(f"n={n} must be nonnegative")
    digits = arith.ladic_expansion(n, ell)
    if n == 0:
        return trivial().renamed(name=f"Syl{ell}(Sym0)")
    parts = [iterated_wreath(ell, i) for i, digit in enumerate(digits) if i for _ in range(digit)]
    if digits[0]:
        parts.append(trivial(digits[0]))
    return direct_product(*parts).renamed(name=f"Syl{ell}(Sym{n})")


def symmetric(n: int) -> GroupSpec:
    if n < 1:
        raise DomainError(f"n={n} must be at least 1")
    generators = []
    if n > 1:
        generators.append(Perm([1, 0] + list(range(2, n))))
    if n > 2:
        generators.append(Perm((i + 1) % n for i in range(n)))
    return GroupSpec(degree=n, generators=generators, name=f"Sym{n}")


def dihedral_model(k: int) -> GroupSpec:
    """C₂ ⋉ Z/2^k acting on Z/2^k by i ↦ i + 1 and i ↦ −i."""
    if k < 2:
        raise DomainError(f"k={k} must be at least 2")
    size = 2**k
    rotation = Perm((i + 1) % size for i in range(size))
    reflection = Perm(-i % size for i in range(size))
    return GroupSpec(degree=size, generators=[rotation, reflection], name=f"D{2 * size}")


def dihedral_power(k: int, r: int) -> GroupSpec:
    if r < 1:
        raise DomainError(f"r={r} must be at least 1")
    return direct_product(*[dihedral_model(k)] * r).renamed(name=f"D{2 ** (k + 1)}^{r}")


def abelian(ell: int, a: int, b: int = 0, c: int = 0) -> GroupSpec:
    """C_{ℓ^a} × C_{ℓ^b} × C_{ℓ^c}; zero exponents drop out."""
    arith.require_prime(ell, "ell")
    exponents = [e for e in (a, b, c) if e != 0]
    if any(e < 0 for e in exponents):
        raise DomainError(f"exponents {a}, {b}, {c} must be nonnegative")
    if not exponents:
        return trivial()
    name = "x".join(f"C{ell**e}" for e in exponents)
    return direct_product(*(cyclic(ell**e) for e in exponents)).renamed(name=name)


def block_diagonal(blocks: Sequence[np.ndarray], d: int) -> np.ndarray:
    """Blocks along the diagonal, identity on the remaining coordinates."""
    matrix = np.eye(d, dtype=np.int64)
    offset = 0
    for block in blocks:
        size = block.shape[0]
        matrix[offset : offset + size, offset : offset + size] = block
        offset += size
    return matrix


def block_generators(block: np.ndarray, blocks: int, d: int) -> list[np.ndarray]:
    """The block on each of the first `blocks` diagonal positions in turn."""
    size = block.shape[0]
    identity = np.eye(size, dtype=np.int64)
    return [block_diagonal([block if i == j else identity for j in range(blocks)], d) for i in range(blocks)]


def block_permutations(top: GroupSpec, size: int, d: int) -> list[np.ndarray]:
    """Permutation matrices moving block i to block τ(i) for each top generator τ."""
    matrices = []
    for tau in top.generators:
        matrix = np.eye(d, dtype=np.int64)
        for i, image in enumerate(tau.images):
            matrix[i * size : (i + 1) * size, :] = 0
            matrix[i * size : (i + 1) * size, image * size : (image + 1) * size] = np.eye(size, dtype=np.int64)
        matrices.append(matrix)
    return matrices


def companion_block(p: int, ell: int, m: int, a: int) -> np.ndarray:
    """
    Companion matrix of the first monic irreducible f of degree m over F_p
    (coefficients in lexicographic order) in which x has order exactly ℓ^a.
    Row j is the image of x^j under multiplication by x.
    """
    for coefficients in itertools.product(range(p), repeat=m):
        f = [1, *coefficients]
        if not gf_irreducible_p(f, p, ZZ):
            continue
        if gf_pow_mod([1, 0], ell**a, f, p, ZZ) != [1]:
            continue
        if gf_pow_mod([1, 0], ell ** (a - 1), f, p, ZZ) == [1]:
            continue
        block = np.zeros((m, m), dtype=np.int64)
        for j in range(m - 1):
            block[j, j + 1] = 1
        block[m - 1] = [-f[m - j] % p for j in range(m)]
        return block
    raise DomainError(f"no irreducible polynomial of degree {m} over F_{p} with x of order {ell}^{a}")


def _gaussian_power(alpha: int, beta: int, exponent: int, p: int) -> list[int]:
    """(α + βi)^exponent in F_p[i] = F_p[x]/(x² + 1); [1] is the unit."""
    return gf_pow_mod(gf_strip([beta % p, alpha % p]), exponent, [1, 0, 1], p, ZZ)


def semidihedral_block(p: int, c: int) -> tuple[np.ndarray, np.ndarray]:
    """
    SD_{2^{c+1}} inside GL₂(F_p), p ≡ 3 mod 4: y is multiplication by the first
    ζ = α + βi of order 2^c in F_p(i)* and x is the Frobenius α + βi ↦ α − βi,
    both in the basis (1, i). Frobenius raises ζ to the power p ≡ −(1 + 2^{c−1}).
    """
    for alpha, beta in itertools.product(range(p), repeat=2):
        if _gaussian_power(alpha, beta, 2**c, p) == [1] and _gaussian_power(alpha, beta, 2 ** (c - 1), p) != [1]:
            y = np.array([[alpha, beta], [-beta % p, alpha]], dtype=np.int64)
            x = np.array([[1, 0], [0, p - 1]], dtype=np.int64)
            return x, y
    raise DomainError(f"F_{p}(i) has no element of order 2^{c}")


def gl_sylow_matrix(d: int, p: int, ell: int) -> MatrixGroupSpec:
    """An explicit Sylow ℓ-subgroup of GL_d(F_p), checked against ℓ^{v_ℓ|GL_d(F_p)|}."""
    arith.require_prime(p, "p")
    arith.require_prime(ell, "ell")
    if p == 2 or ell == p:
        raise DomainError(f"gl_sylow_matrix needs an odd p and ell ≠ p, got p={p}, ell={ell}")
    if d < 1:
        raise DomainError(f"d={d} must be at least 1")
    target = arith.vp(arith.gl_order(d, p), ell)
    if ell == 2 and p % 4 == 3:
        c = arith.depth_c(p)
        blocks = d // 2
        x, y = semidihedral_block(p, c)
        generators = block_generators(x, blocks, d) + block_generators(y, blocks, d)
        generators += block_permutations(sylow_sym(blocks, 2), 2, d) if blocks else []
        if d % 2:
            generators.append(block_diagonal([np.eye(d - 1, dtype=np.int64), np.array([[p - 1]])], d))
        exponent = (c + 1) * blocks + arith.sylow_sym_valuation(blocks, 2) + d % 2
    else:
        m, a = arith.mult_order(p, ell), arith.depth_a(p, ell)
        blocks = d // m
        generators = []
        if blocks:
            generators = block_generators(companion_block(p, ell, m, a), blocks, d)
            generators += block_permutations(sylow_sym(blocks, ell), m, d)
        exponent = a * blocks + arith.sylow_sym_valuation(blocks, ell)
    if exponent != target:
        raise VerificationMismatch(
            f"Sylow {ell}-subgroup of GL_{d}(F_{p}) has order {ell}^{exponent}, expected {ell}^{target}",
            {"d": d, "p": p, "ell": ell, "exponent": exponent, "target": target},
        )
    return MatrixGroupSpec(d=d, modulus=p, generators=generators, name=f"Syl{ell}(GL{d}(F{p}))")


def general_linear(d: int, p: int) -> MatrixGroupSpec:
    """GL_d(F_p) from the elementary transvections and diag(ω, 1, …, 1), ω a primitive root."""
    arith.require_prime(p, "p")
    if d < 1:
        raise DomainError(f"d={d} must be at least 1")
    generators = []
    for i, j in itertools.permutations(range(d), 2):
        transvection = np.eye(d, dtype=np.int64)
        transvection[i, j] = 1
        generators.append(transvection)
    if p > 2:
        scalar = np.eye(d, dtype=np.int64)
        scalar[0, 0] = primitive_root(p)
        generators.append(scalar)
    return MatrixGroupSpec(d=d, modulus=p, generators=generators, name=f"GL{d}(F{p})")


def vectors(d: int, modulus: int) -> np.ndarray:
    """All vectors of (Z/modulus)^d; row i holds the base-modulus digits of i, least significant first."""
    index = np.arange(modulus**d, dtype=np.int64)
    return np.stack([(index // modulus**t) % modulus for t in range(d)], axis=1)


def matrix_to_perm(group: MatrixGroupSpec, cap: int | None = None) -> GroupSpec:
    """The action v ↦ v·A of every generator on the modulus^d module vectors."""
    cap = settings.matrix_degree_cap if cap is None else cap
    degree = group.modulus**group.d
    if degree > cap:
        raise CapExceeded(f"{group} acts on {degree} points, matrix_degree_cap={cap}", partial_count=degree)
    points = vectors(group.d, group.modulus)
    weights = group.modulus ** np.arange(group.d, dtype=np.int64)
    generators = [Perm(((points @ np.array(matrix)) % group.modulus) @ weights) for matrix in group.generators]
    return GroupSpec(degree=degree, generators=generators, name=group.name)


def affine_group(group: MatrixGroupSpec, cap: int | None = None) -> GroupSpec:
    """The linear group extended by all translations of (Z/modulus)^d."""
    linear = matrix_to_perm(group, cap)
    points = vectors(group.d, group.modulus)
    weights = group.modulus ** np.arange(group.d, dtype=np.int64)
    translations = []
    for j in range(group.d):
        shifted = points.copy()
        shifted[:, j] = (shifted[:, j] + 1) % group.modulus
        translations.append(Perm(shifted @ weights))
    return GroupSpec(
        degree=linear.degree, generators=linear.generators + translations, name=f"({group.name})⋉Z{group.modulus}^{group.d}"
    )


def has_invariant_line(group: MatrixGroupSpec) -> bool:
    """Whether some line of F_p^d is mapped to itself by every generator."""
    p = group.p
    points = vectors(group.d, p)[1:]
    leading = points[np.arange(len(points)), (points != 0).argmax(axis=1)]
    representatives = points[leading == 1]
    invariant = np.ones(len(representatives), dtype=bool)
    for matrix in group.generators:
        images = (representatives @ (np.array(matrix) % p)) % p
        # v·A lies on the line of v iff the 2×2 minors of (v, v·A) vanish
        minors = (representatives[:, :, None] * images[:, None, :] - representatives[:, None, :] * images[:, :, None]) % p
        invariant &= ~minors.reshape(len(representatives), -1).any(axis=1)
    return bool(invariant.any())


def remark_s_group(p: int, k: int = 1) -> MatrixGroupSpec:
    """The irreducible order-16 subgroup of GL₂(Z/p^k) needing three generators."""
    if arith.require_prime(p) % 4 != 1:
        raise DomainError(f"remark_s_group needs p ≡ 1 mod 4, got p={p}")
    if k < 1:
        raise DomainError(f"k={k} must be at least 1")
    modulus = p**k
    i = arith.sqrt_minus_one(p, k)
    generators = [[[0, 1], [1, 0]], [[i, 0], [0, i]], [[modulus - 1, 0], [0, 1]]]
    return MatrixGroupSpec(d=2, modulus=modulus, generators=generators, name=f"S({p}^{k})")


def heisenberg(p: int) -> MatrixGroupSpec:
    """Upper unitriangular 3×3 matrices over F_p, extraspecial of order p³."""
    if arith.require_prime(p) == 2:
        raise DomainError("heisenberg needs an odd prime")
    generators = [[[1, 1, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 1], [0, 0, 1]]]
    return MatrixGroupSpec(d=3, modulus=p, generators=generators, name=f"Heis({p})")


def remark_s_affine(p: int, k: int = 1) -> GroupSpec:
    return affine_group(remark_s_group(p, k))


def least_unit_of_order(m: int, modulus: int) -> int:
    for u in range(2, modulus):
        if math.gcd(u, modulus) == 1 and n_order(u, modulus) == m:
            return u
    raise DomainError(f"no unit of order {m} modulo {modulus}")


def remark_affine(p: int, m: int, d: int, k: int) -> GroupSpec:
    """C_m ⋉ (Z/p^k)^d with C_m acting by an order-m scalar."""
    arith.require_prime(p)
    if m == 1 or (p - 1) % m:
        raise DomainError(f"m={m} must divide p − 1 = {p - 1} and differ from 1")
    if d < 1 or k < 1:
        raise DomainError(f"d={d} and k={k} must be at least 1")
    modulus = p**k
    u = least_unit_of_order(m, modulus)
    scalar = MatrixGroupSpec(d=d, modulus=modulus, generators=[np.eye(d, dtype=np.int64) * u], name=f"C{m}")
    return affine_group(scalar)


def qp_max_p_group(p: int, d: int) -> GroupSpec:
    """C_p ≀ Syl_p(Sym(⌊d/(p−1)⌋)), trivial when d < p − 1."""
    arith.require_prime(p)
    if p == 2:
        raise DomainError("qp_max_p_group needs an odd p")
    n = d // (p - 1)
    if n == 0:
        return trivial()
    return wreath(cyclic(p), sylow_sym(n, p))


@dataclass(frozen=True)
class Builder:
    function: Callable
    params: tuple[str, ...]
    defaults: dict[str, int] = field(default_factory=dict)
    matrix: bool = False


BUILDERS: dict[str, Builder] = {
    "cyclic": Builder(cyclic, ("n",)),
    "semidihedral": Builder(semidihedral, ("c",)),
    "iterated-wreath": Builder(iterated_wreath, ("ell", "r")),
    "xgroup": Builder(xgroup, ("ell", "a", "r")),
    "ygroup": Builder(ygroup, ("c", "r")),
    "sylow-sym": Builder(sylow_sym, ("n", "ell")),
    "symmetric": Builder(symmetric, ("n",)),
    "dihedral": Builder(dihedral_model, ("k",)),
    "dihedral-power": Builder(dihedral_power, ("k", "r")),
    "abelian": Builder(abelian, ("ell", "a", "b", "c"), {"b": 0, "c": 0}),
    "heisenberg": Builder(heisenberg, ("p",), matrix=True),
    "remark-s": Builder(remark_s_group, ("p", "k"), {"k": 1}, matrix=True),
    "remark-s-affine": Builder(remark_s_affine, ("p", "k"), {"k": 1}),
    "remark-affine": Builder(remark_affine, ("p", "m", "d", "k"), {"k": 1}),
    "gl-sylow": Builder(gl_sylow_matrix, ("d", "p", "ell"), matrix=True),
    "gl": Builder(general_linear, ("d", "p"), matrix=True),
    "qp-max-p": Builder(qp_max_p_group, ("p", "d")),
}


def resolve(target: Target) -> tuple[Builder, Target]:
    """The registered builder and the target with defaults filled in."""
    try:
        builder = BUILDERS[target.builder]
    except KeyError:
        raise DomainError(f"unknown builder {target.builder!r}; known: {', '.join(sorted(BUILDERS))}") from None
    params = builder.defaults | target.params
    unknown, missing = set(params) - set(builder.params), set(builder.params) - set(params)
    if unknown or missing:
        raise DomainError(
            f"{target.builder} takes {', '.join(builder.params)}; "
            f"missing {sorted(missing) or 'nothing'}, unknown {sorted(unknown) or 'nothing'}"
        )
    return builder, Target(builder=target.builder, params=params)


def build(target: Target) -> GroupSpec:
    """Permutation group for a target; matrix groups act on their module vectors."""
    builder, target = resolve(target)
    spec = builder.function(**target.params)
    if builder.matrix:
        spec = matrix_to_perm(spec)
    return spec.renamed(name=target.label(), descriptor=target)


def build_matrix(target: Target) -> MatrixGroupSpec:
    builder, target = resolve(target)
    if not builder.matrix:
        raise DomainError(f"{target.builder} is not a matrix group builder")
    group = builder.function(**target.params)
    group.name, group.descriptor = target.label(), target
    return group
