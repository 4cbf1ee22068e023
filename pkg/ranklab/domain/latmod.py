"""
Finite modules over Z/ℓ^k: canonical spans, minimal numbers of module
generators, sampled checks of the monomial-lattice bound and the
decomposition of lattices for a cyclic group of order p.

Vectors are numpy int64 rows; matrices act on row vectors from the right.
"""
import itertools
import logging

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from sympy import Matrix, Poly, symbols

from ..config import settings
from . import arith
from .constructions import block_diagonal, cyclic, matrix_to_perm
from .exceptions import CapExceeded, DomainError, NotDecomposable, NotFaithful, NotInvariant
from .model import HRMultiplicities, MatrixGroupSpec, Perm
from .permgroup import closure, d_frattini, prime_power_base


logger = logging.getLogger(__name__)

X = symbols("x")


def valuations(array: np.ndarray, ell: int, k: int) -> np.ndarray:
    """Entrywise ℓ-adic valuation modulo ℓ^k; zero entries get k."""
    array = np.asarray(array, dtype=np.int64) % ell**k
    result = np.where(array == 0, k, 0)
    current = array.copy()
    for v in range(1, k):
        divisible = (array != 0) & (current % ell == 0)
        result[divisible] = v
        current = np.where(divisible, current // ell, current)
    return result


def _as_rows(vectors, n: int | None) -> tuple[np.ndarray, int]:
    rows = np.asarray(vectors, dtype=np.int64)
    if rows.size == 0:
        if n is None:
            n = rows.shape[-1] if rows.ndim == 2 else 0
        return np.zeros((0, n), dtype=np.int64), n
    rows = np.atleast_2d(rows)
    return rows, rows.shape[1]


def howell_basis(vectors, ell: int, k: int, n: int | None = None) -> np.ndarray:
    """
    Canonical basis of the row span over Z/ℓ^k: echelon rows with pivots ℓ^v,
    entries above a pivot reduced into [0, ℓ^v), and ℓ^{k−v}·row fed back so
    that reduction decides membership.
    """
    q = ell**k
    rows, n = _as_rows(vectors, n)
    work = [row % q for row in rows]
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    for col in range(n):
        work = [row for row in work if row.any()]
        candidates = [i for i, row in enumerate(work) if row[col]]
        if not candidates:
            continue
        order = valuations(np.array([work[i][col] for i in candidates]), ell, k)
        pivot = work.pop(candidates[int(np.argmin(order))])
        v = int(order.min())
        step = ell**v
        pivot = pivot * pow(int(pivot[col]) // step, -1, q) % q
        work = [(row - (row[col] // step) * pivot) % q if row[col] else row for row in work]
        work.append(pivot * ell ** (k - v) % q)
        basis.append(pivot)
        pivots.append(col)
    for i, col in enumerate(pivots):
        step = basis[i][col]
        for j in range(i):
            factor = basis[j][col] // step
            if factor:
                basis[j] = (basis[j] - factor * basis[i]) % q
    return np.array(basis, dtype=np.int64).reshape(len(basis), n)


def _pivots(basis: np.ndarray) -> list[int]:
    return [int(np.flatnonzero(row)[0]) for row in basis]


def span_reduce(basis: np.ndarray, vector, ell: int, k: int) -> np.ndarray:
    """Canonical representative of vector modulo the span of a Howell basis."""
    q = ell**k
    vector = np.asarray(vector, dtype=np.int64) % q
    for row, col in zip(basis, _pivots(basis)):
        vector = (vector - (vector[col] // row[col]) * row) % q
    return vector


def span_contains(basis: np.ndarray, vector, ell: int, k: int) -> bool:
    return not span_reduce(basis, vector, ell, k).any()


def span_size(basis: np.ndarray, ell: int, k: int) -> int:
    size = 1
    for row, col in zip(basis, _pivots(basis)):
        size *= ell ** (k - arith.vp(int(row[col]), ell))
    return size


def span_elements(basis: np.ndarray, ell: int, k: int) -> np.ndarray:
    """Every element of the span, each exactly once."""
    q = ell**k
    ranges = [range(ell ** (k - arith.vp(int(row[col]), ell))) for row, col in zip(basis, _pivots(basis))]
    if not ranges:
        return np.zeros((1, basis.shape[1]), dtype=np.int64)
    coefficients = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    return coefficients @ basis % q


def invariant_closure(vectors, actions: Sequence[np.ndarray], ell: int, k: int, n: int | None = None) -> np.ndarray:
    """Howell basis of the smallest span containing vectors and stable under every action."""
    q = ell**k
    basis = howell_basis(vectors, ell, k, n)
    n = basis.shape[1] if n is None else n
    size = span_size(basis, ell, k)
    while True:
        images = [basis] + [basis @ np.asarray(action, dtype=np.int64) % q for action in actions]
        basis = howell_basis(np.concatenate(images), ell, k, n)
        grown = span_size(basis, ell, k)
        if grown == size:
            return basis
        size = grown


def smith_valuations(matrix, ell: int, k: int) -> list[int]:
    """Valuations of the Smith invariant factors over Z/ℓ^k, ascending; k stands for zero."""
    q = ell**k
    work = np.asarray(matrix, dtype=np.int64) % q
    rows, cols = work.shape
    result = []
    for t in range(min(rows, cols)):
        order = valuations(work[t:, t:], ell, k)
        if order.min() == k:
            result.extend([k] * (min(rows, cols) - t))
            break
        i, j = np.unravel_index(int(np.argmin(order)), order.shape)
        work[[t, t + i]] = work[[t + i, t]]
        work[:, [t, t + j]] = work[:, [t + j, t]]
        v = int(order.min())
        step = ell**v
        work[t] = work[t] * pow(int(work[t, t]) // step, -1, q) % q
        for r in range(t + 1, rows):
            work[r] = (work[r] - (work[r, t] // step) * work[t]) % q
        for c in range(t + 1, cols):
            work[:, c] = (work[:, c] - (work[t, c] // step) * work[:, t]) % q
        result.append(v)
    return sorted(result)


@dataclass
class MonomialMatrix:
    """h with entry (i, σ(i)) = units[i] and zeros elsewhere."""

    ell: int
    k: int
    sigma: Perm
    units: tuple[int, ...]

    def __post_init__(self):
        if len(self.units) != self.sigma.degree:
            raise DomainError(f"{len(self.units)} units for a permutation of degree {self.sigma.degree}")
        if any(u % self.ell == 0 for u in self.units):
            raise DomainError(f"units {self.units} are not all invertible modulo {self.ell}")

    @property
    def n(self) -> int:
        return self.sigma.degree

    @cached_property
    def matrix(self) -> np.ndarray:
        h = np.zeros((self.n, self.n), dtype=np.int64)
        h[np.arange(self.n), list(self.sigma.images)] = np.asarray(self.units, dtype=np.int64) % self.ell**self.k
        return h

    @classmethod
    def sample(cls, rng: np.random.Generator, ell: int, n: int, k: int) -> "MonomialMatrix":
        """σ without fixed points and of ℓ-power order; units uniform in (Z/ℓ^k)*."""
        points = rng.permutation(n)
        images = np.empty(n, dtype=np.int64)
        start = 0
        while start < n:
            lengths = [ell**j for j in range(1, n + 1) if ell**j <= n - start]
            length = lengths[rng.integers(len(lengths))]
            cycle = points[start : start + length]
            images[cycle] = np.roll(cycle, -1)
            start += length
        units = rng.integers(0, ell ** (k - 1), n) * ell + rng.integers(1, ell, n)
        return cls(ell=ell, k=k, sigma=Perm(images.tolist()), units=tuple(int(u) for u in units))


@dataclass
class Submodule:
    """Row span of generators inside (Z/ℓ^k)^n, acted on by h."""

    h: np.ndarray
    ell: int
    k: int
    generators: np.ndarray

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @cached_property
    def basis(self) -> np.ndarray:
        return howell_basis(self.generators, self.ell, self.k, self.n)

    @property
    def size(self) -> int:
        return span_size(self.basis, self.ell, self.k)

    def is_invariant(self) -> bool:
        q = self.ell**self.k
        return all(span_contains(self.basis, row @ self.h % q, self.ell, self.k) for row in self.basis)

    @classmethod
    def closure_of(cls, h: np.ndarray, ell: int, k: int, vectors) -> "Submodule":
        h = np.asarray(h, dtype=np.int64)
        return cls(h=h, ell=ell, k=k, generators=invariant_closure(vectors, [h], ell, k, h.shape[0]))


def matrix_polynomial(coefficients: Sequence[int], h: np.ndarray, modulus: int) -> np.ndarray:
    """f(h) mod modulus by Horner's rule; coefficients highest degree first."""
    result = np.zeros_like(h)
    identity = np.eye(h.shape[0], dtype=np.int64)
    for coefficient in coefficients:
        result = (result @ h + int(coefficient) * identity) % modulus
    return result


def residue_factors(h: np.ndarray, ell: int) -> list[list[int]]:
    """Irreducible factors over F_ℓ of the characteristic polynomial of h, as coefficient lists."""
    charpoly = Matrix(h.tolist()).charpoly(X).as_expr()
    _, factors = Poly(charpoly, X, modulus=ell).factor_list()
    return [[int(c) % ell for c in factor.all_coeffs()] for factor, _ in factors]


def min_gen_count(module: Submodule) -> int:
    """
    d(M) over R = (Z/ℓ^k)[h]: the maximum over maximal ideals 𝔪 = (ℓ, π(h)),
    π an irreducible factor of the characteristic polynomial of h mod ℓ,
    of dim_{R/𝔪} M/𝔪M.
    """
    if not module.is_invariant():
        raise NotInvariant("h does not map the submodule into itself")
    ell, k, q = module.ell, module.k, module.ell**module.k
    basis = module.basis
    if basis.shape[0] == 0:
        return 0
    best = 0
    for factor in residue_factors(module.h, ell):
        image = basis @ matrix_polynomial(factor, module.h, q) % q
        radical = howell_basis(np.concatenate([ell * basis % q, image]), ell, k, module.n)
        exponent = arith.vp(module.size // span_size(radical, ell, k), ell)
        best = max(best, exponent // (len(factor) - 1))
    return best


def _coset_representatives(basis: np.ndarray, radical: np.ndarray, ell: int, k: int, cap: int) -> list[np.ndarray]:
    """Distinct nonzero representatives of M/radical·M, from coefficient vectors in [0, ℓ)."""
    if ell ** basis.shape[0] > cap:
        raise CapExceeded(f"{ell}^{basis.shape[0]} coefficient vectors exceed the search cap {cap}", ell ** basis.shape[0])
    q = ell**k
    found: dict[bytes, np.ndarray] = {}
    for coefficients in itertools.product(range(ell), repeat=basis.shape[0]):
        vector = span_reduce(radical, np.asarray(coefficients, dtype=np.int64) @ basis % q, ell, k)
        if vector.any():
            found.setdefault(vector.tobytes(), vector)
    return list(found.values())


def exhaustive_gen_count(
    actions: Sequence[np.ndarray], basis: np.ndarray, ell: int, k: int, cap: int | None = None
) -> int:
    """
    Least number of generators of the submodule with the given Howell basis,
    found level by level. A set generates M iff together with ℓM it does, so
    candidates are taken modulo ℓM.
    """
    cap = settings.prop_key_search_cap if cap is None else cap
    q, n = ell**k, basis.shape[1]
    target = span_size(basis, ell, k)
    radical = howell_basis(ell * basis % q, ell, k, n)
    if span_size(radical, ell, k) == target:
        return 0
    representatives = _coset_representatives(basis, radical, ell, k, cap)
    level = {radical.tobytes(): radical}
    for size in itertools.count(1):
        following: dict[bytes, np.ndarray] = {}
        for current in level.values():
            for vector in representatives:
                if span_contains(current, vector, ell, k):
                    continue
                grown = invariant_closure(np.vstack([current, vector]), actions, ell, k, n)
                if span_size(grown, ell, k) == target:
                    return size
                following.setdefault(grown.tobytes(), grown)
        level = following


def check_lemma_bound(h: MonomialMatrix, module: Submodule) -> tuple[int, bool]:
    d = min_gen_count(module)
    return d, h.ell * d <= 2 * h.n


@dataclass
class Lemma32Report:
    ell: int
    n: int
    k: int
    trials: int
    seed: int
    violations: int = 0
    max_observed: int = 0
    counterexamples: list[dict] = field(default_factory=list)

    @property
    def bound(self) -> int:
        return 2 * self.n // self.ell

    def dict(self):
        return {
            "ell": self.ell,
            "n": self.n,
            "k": self.k,
            "trials": self.trials,
            "seed": self.seed,
            "violations": self.violations,
            "max_observed": self.max_observed,
            "bound": self.bound,
        }


def sample_module(rng: np.random.Generator, h: MonomialMatrix) -> Submodule:
    """h-closure of one to n random vectors, each scaled by a random power of ℓ."""
    q = h.ell**h.k
    count = int(rng.integers(1, h.n + 1))
    vectors = rng.integers(0, q, (count, h.n)) * (h.ell ** rng.integers(0, h.k, (count, 1))) % q
    return Submodule.closure_of(h.matrix, h.ell, h.k, vectors)


def verify_lemma32(ell: int, n: int, k: int, trials: int | None = None, seed: int | None = None) -> Lemma32Report:
    """
    Sample (h, M) pairs and count those with d(M) > 2n/ℓ; each trial has its own child seed.

    The bound is stated for modules over Z/ℓ^k itself, so the count is exact at
    each k and there is no recheck at k + 1. Only hr_decompose reads statements
    about Z_p-lattices off a finite level.
    """
    arith.require_prime(ell, "ell")
    if n < 1 or n % ell:
        raise DomainError(f"n={n} must be a positive multiple of ell={ell}")
    if k < 1:
        raise DomainError(f"k={k} must be at least 1")
    trials = settings.default_trials if trials is None else trials
    seed = settings.default_seed if seed is None else seed
    report = Lemma32Report(ell=ell, n=n, k=k, trials=trials, seed=seed)
    for trial, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        h = MonomialMatrix.sample(rng, ell, n, k)
        module = sample_module(rng, h)
        d, holds = check_lemma_bound(h, module)
        report.max_observed = max(report.max_observed, d)
        if not holds:
            report.violations += 1
            report.counterexamples.append({"trial": trial, "sigma": list(h.sigma.images), "units": list(h.units)})
    logger.debug("lemma bound (ell=%d, n=%d, k=%d): %d violations", ell, n, k, report.violations)
    return report


def cyclotomic_companion(p: int) -> np.ndarray:
    """Companion matrix of 1 + x + ⋯ + x^{p−1}: x acting on Z[ζ_p] in the basis 1, ζ, …, ζ^{p−2}."""
    block = np.zeros((p - 1, p - 1), dtype=np.int64)
    for j in range(p - 2):
        block[j, j + 1] = 1
    block[p - 2] = -1
    return block


def regular_block(p: int) -> np.ndarray:
    return np.array(matrix_rows(cyclic(p).generators[0]), dtype=np.int64)


def matrix_rows(perm: Perm) -> list[list[int]]:
    """Permutation matrix sending e_i to e_{perm(i)}."""
    return [[int(j == image) for j in range(perm.degree)] for image in perm.images]


def random_unimodular(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    """An integer matrix with entries in [0, p²) and determinant prime to p."""
    while True:
        candidate = rng.integers(0, p * p, (n, n))
        if int(Matrix(candidate.tolist()).det()) % p:
            return candidate.astype(np.int64)


def change_basis(x: np.ndarray, basis: np.ndarray, modulus: int) -> np.ndarray:
    """P·x·P⁻¹ modulo modulus."""
    inverse = np.array(Matrix(basis.tolist()).inv_mod(modulus).tolist(), dtype=np.int64)
    return basis @ x % modulus @ inverse % modulus


def hr_module(p: int, k: int, a: int, b: int, c: int, seed: int | None = None) -> np.ndarray:
    """
    x acting on a trivial^a ⊕ Z[ζ_p]^b ⊕ (Z C_p)^c modulo p^k. With a seed the
    basis is changed by an integral matrix drawn from that seed, so the same
    seed gives the same lattice at every precision.
    """
    blocks = [np.eye(1, dtype=np.int64)] * a + [cyclotomic_companion(p)] * b + [regular_block(p)] * c
    n = a + b * (p - 1) + c * p
    if n == 0:
        raise DomainError("the module must have positive rank")
    x = block_diagonal(blocks, n) % p**k
    if seed is not None:
        x = change_basis(x, random_unimodular(np.random.default_rng(seed), n, p), p**k)
    return x


def hr_decompose(x: np.ndarray, p: int, k: int) -> HRMultiplicities:
    """
    Multiplicities of the trivial, Z[ζ_p] and free summands of a lattice with
    an action of order p, read from Smith valuations. The norm element
    N = 1 + x + ⋯ + x^{p−1} has a factor p per trivial summand and a unit
    per free summand; x − 1 has a factor p per Z[ζ_p] summand and a zero per
    trivial or free summand.
    """
    arith.require_prime(p)
    if k < 2:
        raise DomainError(f"k={k}: telling p apart from 0 needs k ≥ 2")
    q = p**k
    x = np.asarray(x, dtype=np.int64) % q
    n = x.shape[0]
    identity = np.eye(n, dtype=np.int64)
    if not np.array_equal(_matrix_power(x, p, q), identity):
        raise DomainError(f"x does not have order dividing {p} modulo {p}^{k}")
    norm = sum((_matrix_power(x, i, q) for i in range(p)), np.zeros_like(x)) % q
    norm_valuations = smith_valuations(norm, p, k)
    difference_valuations = smith_valuations((x - identity) % q, p, k)
    a = norm_valuations.count(1)
    c = norm_valuations.count(0)
    b, remainder = divmod(n - a - c * p, p - 1)
    consistent = (
        remainder == 0
        and b >= 0
        and set(norm_valuations) <= {0, 1, k}
        and set(difference_valuations) <= {0, 1, k}
        and difference_valuations.count(1) == b
        and difference_valuations.count(k) == a + c
    )
    if not consistent:
        raise NotDecomposable(
            f"Smith valuations N={norm_valuations}, x−1={difference_valuations} fit no trivial/cyclotomic/free sum"
        )
    return HRMultiplicities(a=a, b=b, c=c)


def _matrix_power(x: np.ndarray, exponent: int, modulus: int) -> np.ndarray:
    result = np.eye(x.shape[0], dtype=np.int64)
    base = x % modulus
    while exponent:
        if exponent & 1:
            result = result @ base % modulus
        base = base @ base % modulus
        exponent >>= 1
    return result


def matrix_group_order(group: MatrixGroupSpec, cap: int | None = None) -> int:
    """Order of a matrix group by breadth-first closure over its matrices."""
    cap = settings.closure_cap if cap is None else cap
    q = group.modulus
    generators = [np.array(g, dtype=np.int64) for g in group.generators]
    identity = np.eye(group.d, dtype=np.int64)
    seen = {identity.tobytes()}
    frontier = [identity]
    while frontier:
        following = []
        for element in frontier:
            for g in generators:
                product = element @ g % q
                key = product.tobytes()
                if key not in seen:
                    seen.add(key)
                    following.append(product)
        if len(seen) > cap:
            raise CapExceeded(f"{group} has more than {cap} elements", partial_count=len(seen))
        frontier = following
    return len(seen)


@dataclass
class PropKeyResult:
    name: str
    p: int
    k: int
    rank: int
    d_group: int
    d_module: int

    @property
    def holds(self) -> bool:
        return self.d_group + self.d_module <= self.rank

    def dict(self):
        return {
            "name": self.name,
            "p": self.p,
            "k": self.k,
            "rank": self.rank,
            "d_group": self.d_group,
            "d_module": self.d_module,
            "holds": self.holds,
        }


def module_gen_count(actions: Sequence[np.ndarray], p: int, k: int, n: int, cap: int | None = None) -> int:
    """
    d of the free module (Z/p^k)^n over the ring generated by the actions.
    The dimension of M/(p, g − 1 : g)M bounds it from below; a set lifting a
    basis of that quotient either generates (and the bound is exact) or the
    exhaustive level search decides.
    """
    residues = [np.asarray(action, dtype=np.int64) % p for action in actions]
    identity = np.eye(n, dtype=np.int64)
    augmentation = howell_basis(
        np.concatenate([(action - identity) % p for action in residues] or [np.zeros((0, n), dtype=np.int64)]), p, 1, n
    )
    chosen: list[np.ndarray] = []
    current = augmentation
    for vector in identity:
        if not span_contains(current, vector, p, 1):
            chosen.append(vector)
            current = howell_basis(np.vstack([current, vector]), p, 1, n)
    if not chosen:
        return 0
    generated = invariant_closure(np.vstack(chosen), residues, p, 1, n)
    if span_size(generated, p, 1) == p**n:
        return len(chosen)
    return exhaustive_gen_count(residues, howell_basis(identity, p, 1, n), p, 1, cap)


def verify_prop_key(group: MatrixGroupSpec, name: str | None = None) -> PropKeyResult:
    """
    d(G) + d_{(Z/p^k)G}(M) ≤ rank(M) for a p-group G acting faithfully on the
    free module M = (Z/p^k)^d. Faithful means already faithful on M/pM.
    """
    p, k, n = group.p, group.k, group.d
    if p == 2:
        raise DomainError("verify_prop_key needs an odd p")
    order = matrix_group_order(group)
    if order != 1 and prime_power_base(order) != p:
        raise DomainError(f"|G| = {order} is not a power of p={p}")
    residue = group.reduced(p)
    if matrix_group_order(residue) != order:
        raise NotFaithful(f"{group.name} acts with a nontrivial kernel on M/{p}M")
    d_group = d_frattini(closure(matrix_to_perm(residue)), p)
    actions = [np.array(g, dtype=np.int64) for g in group.generators]
    if len(actions) == 1:
        h = actions[0]
        d_module = min_gen_count(Submodule(h=h, ell=p, k=k, generators=np.eye(n, dtype=np.int64)))
    else:
        d_module = module_gen_count(actions, p, k, n)
    return PropKeyResult(name=name or group.name or "G", p=p, k=k, rank=n, d_group=d_group, d_module=d_module)


def prop_key_instances(p: int, k: int, seed: int | None = None) -> list[tuple[str, MatrixGroupSpec]]:
    """
    Faithful p-group lattices of rank ≤ 6: C_p on sums of trivial, Z[ζ_p] and
    free summands; C_{p²} on Z[ζ_{p²}] when it fits; C_p × C_p acting on two
    separate nontrivial summands. Every basis is changed by a seeded random
    integral matrix.
    """
    seed = settings.default_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    q = p**k
    pieces = {"T": np.eye(1, dtype=np.int64), "Z": cyclotomic_companion(p), "F": regular_block(p)}
    instances: list[tuple[str, list[np.ndarray], int]] = []
    for a, b, c in itertools.product(range(7), range(4), range(3)):
        n = a + b * (p - 1) + c * p
        if b + c and n <= 6:
            x = block_diagonal([pieces["T"]] * a + [pieces["Z"]] * b + [pieces["F"]] * c, n)
            instances.append((f"C{p}:T{a}Z{b}F{c}", [x], n))
    if p * (p - 1) <= 6:
        coefficients = Poly(sum(X ** (j * p) for j in range(p)), X).all_coeffs()
        size = p * (p - 1)
        x = np.zeros((size, size), dtype=np.int64)
        for j in range(size - 1):
            x[j, j + 1] = 1
        x[size - 1] = [-int(coefficients[size - j]) for j in range(size)]
        instances.append((f"C{p * p}:Z", [x], size))
    for first, second in itertools.product("ZF", repeat=2):
        left, right = pieces[first], pieces[second]
        core = left.shape[0] + right.shape[0]
        for pad in range(0, 7 - core):
            n = core + pad
            x = block_diagonal([left], n)
            y = block_diagonal([np.eye(left.shape[0], dtype=np.int64), right], n)
            instances.append((f"C{p}xC{p}:{first}{second}T{pad}", [x, y], n))
    result = []
    for name, matrices, n in instances:
        basis = random_unimodular(rng, n, p)
        generators = [change_basis(m % q, basis, q) for m in matrices]
        result.append((f"{name}/k{k}", MatrixGroupSpec(d=n, modulus=q, generators=generators, name=name)))
    return result
