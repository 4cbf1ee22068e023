"""
Exact finite-group engine on fully enumerated permutation groups.

A GroupTable keeps every element of a group as one row of a numpy array.
Rows are sorted lexicographically, so element 0 is the identity and every
"least" choice (class representatives, rank witnesses) is a comparison of
sorted index tuples. Subgroups are boolean membership masks over the element
indices of the table they live in.
"""
import logging

from collections import deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from sympy import factorint

from ..config import settings
from .exceptions import BudgetExceeded, CapExceeded, DomainError, NotNilpotent, NotPrimePower, SearchExhausted
from .model import GroupSpec, Perm


logger = logging.getLogger(__name__)


def point_dtype(degree: int) -> type[np.unsignedinteger]:
    if degree <= 2**8:
        return np.uint8
    if degree <= 2**16:
        return np.uint16
    return np.uint32


def prime_power_base(order: int) -> int | None:
    """ℓ when order = ℓ^n for some n ≥ 1, None otherwise."""
    factors = factorint(order)
    if len(factors) == 1:
        return next(iter(factors))
    return None


def big_omega(order: int) -> int:
    """Number of prime factors of order counted with multiplicity; bounds d(H) for |H| = order."""
    return sum(factorint(order).values())


def prime_divisors(order: int) -> list[int]:
    return sorted(factorint(order))


def log_exact(n: int, ell: int) -> int:
    exponent = 0
    while n > 1:
        n, remainder = divmod(n, ell)
        if remainder:
            raise NotPrimePower(f"{n * ell + remainder} is not a power of {ell}")
        exponent += 1
    return exponent


@dataclass(eq=False)
class Subgroup:
    """Element-index set of a subgroup plus the indices that generate it."""

    mask: np.ndarray
    generators: tuple[int, ...] = ()

    @cached_property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @cached_property
    def order(self) -> int:
        return int(np.count_nonzero(self.mask))

    @cached_property
    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes()

    def sort_key(self) -> tuple[int, ...]:
        return tuple(self.indices.tolist())

    def __contains__(self, index) -> bool:
        return bool(self.mask[index])

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Subgroup(order={self.order}, generators={list(self.generators)})"


class GroupTable:
    """
    A fully enumerated finite group. The Cayley table, inverses, powers and
    structural subgroups are computed on first use and cached.
    """

    def __init__(self, spec: GroupSpec, elements: np.ndarray, mul: np.ndarray | None = None):
        self.spec = spec
        self.elements = elements
        self.order = len(elements)
        if mul is not None:
            self.__dict__["mul"] = mul

    def __repr__(self):
        return f"GroupTable(name={self.spec.name}, degree={self.degree}, order={self.order})"

    @property
    def degree(self) -> int:
        return self.spec.degree

    @cached_property
    def lookup(self) -> dict[bytes, int]:
        return {row.tobytes(): index for index, row in enumerate(self.elements)}

    def index_of(self, perm: Perm | Iterable[int]) -> int:
        images = perm.images if isinstance(perm, Perm) else tuple(perm)
        try:
            return self.lookup[np.asarray(images, dtype=self.elements.dtype).tobytes()]
        except KeyError:
            raise DomainError(f"{images} is not an element of {self}") from None

    def perm(self, index: int) -> Perm:
        return Perm(self.elements[index].tolist())

    @cached_property
    def generator_indices(self) -> tuple[int, ...]:
        return tuple(self.index_of(generator) for generator in self.spec.generators)

    @cached_property
    def mul(self) -> np.ndarray:
        """mul[i, j] is the index of "element i, then element j"."""
        if self.order > settings.multiplication_table_cap:
            raise CapExceeded(
                f"order {self.order} exceeds multiplication_table_cap={settings.multiplication_table_cap}",
                partial_count=self.order,
            )
        table = np.empty((self.order, self.order), dtype=np.int32)
        for i, row in enumerate(self.elements):
            # left multiplication by a fixed element permutes the sorted rows
            _, positions = np.unique(self.elements[:, row], axis=0, return_inverse=True)
            table[i] = positions.reshape(-1)
        return table

    @cached_property
    def inv(self) -> np.ndarray:
        return np.argmax(self.mul == 0, axis=1)

    def power(self, exponent: int) -> np.ndarray:
        """Index of g^exponent for every element g."""
        cache = self.__dict__.setdefault("_powers", {})
        if exponent in cache:
            return cache[exponent]
        base = np.arange(self.order) if exponent >= 0 else self.inv.copy()
        result = np.zeros(self.order, dtype=np.intp)
        remaining = abs(exponent)
        while remaining:
            if remaining & 1:
                result = self.mul[result, base]
            base = self.mul[base, base]
            remaining >>= 1
        cache[exponent] = result
        return result

    @cached_property
    def element_orders(self) -> np.ndarray:
        orders = np.zeros(self.order, dtype=np.int64)
        every = np.arange(self.order)
        current = every.copy()
        step = 1
        while not orders.all():
            orders[(current == 0) & (orders == 0)] = step
            current = self.mul[current, every]
            step += 1
        return orders

    def trivial(self) -> Subgroup:
        mask = np.zeros(self.order, dtype=bool)
        mask[0] = True
        return Subgroup(mask)

    def whole(self) -> Subgroup:
        return Subgroup(np.ones(self.order, dtype=bool), self.generator_indices)

    def generate(self, generators: Iterable[int], start: Subgroup | None = None) -> Subgroup:
        """Subgroup generated by start together with the given elements."""
        start = start or self.trivial()
        extra = [int(g) for g in dict.fromkeys(int(g) for g in generators) if not start.mask[g]]
        if not extra:
            return start
        all_generators = start.generators + tuple(extra)
        step = np.asarray(all_generators, dtype=np.intp)
        mask = start.mask.copy()
        frontier = start.indices
        while frontier.size:
            products = self.mul[np.ix_(frontier, step)].ravel()
            fresh = np.unique(products[~mask[products]])
            mask[fresh] = True
            frontier = fresh
        return Subgroup(mask, all_generators)

    def cyclic(self, x: int) -> Subgroup:
        mask = np.zeros(self.order, dtype=bool)
        mask[0] = True
        current = int(x)
        while current:
            mask[current] = True
            current = int(self.mul[current, x])
        return Subgroup(mask, (int(x),) if x else ())

    def from_mask(self, mask: np.ndarray) -> Subgroup:
        """Subgroup for a known membership mask; generators are picked greedily in index order."""
        current = self.trivial()
        target = int(np.count_nonzero(mask))
        for x in np.flatnonzero(mask):
            if current.order == target:
                break
            if not current.mask[x]:
                current = self.generate([x], start=current)
        return current

    def conjugate_indices(self, indices: np.ndarray, g: int) -> np.ndarray:
        """g⁻¹·x·g for every x in indices."""
        return self.mul[self.mul[self.inv[g], indices], g]

    def conjugate(self, subgroup: Subgroup, g: int) -> Subgroup:
        mask = np.zeros(self.order, dtype=bool)
        mask[self.conjugate_indices(subgroup.indices, g)] = True
        generators = self.conjugate_indices(np.asarray(subgroup.generators, dtype=np.intp), g)
        return Subgroup(mask, tuple(int(x) for x in generators))

    def conjugacy_orbit(self, subgroup: Subgroup) -> list[Subgroup]:
        orbit = {subgroup.key: subgroup}
        frontier = [subgroup]
        while frontier:
            following = []
            for member in frontier:
                for g in self.generator_indices:
                    image = self.conjugate(member, g)
                    if image.key not in orbit:
                        orbit[image.key] = image
                        following.append(image)
            frontier = following
        return list(orbit.values())

    def normalizer_mask(self, subgroup: Subgroup) -> np.ndarray:
        every = np.arange(self.order)
        conjugates = self.mul[self.mul[self.inv[:, None], subgroup.indices[None, :]], every[:, None]]
        return subgroup.mask[conjugates].all(axis=1)

    def commutators(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """[a, b] = a⁻¹·b⁻¹·a·b for all pairs (a, b), flattened."""
        a, b = np.meshgrid(np.asarray(left, dtype=np.intp), np.asarray(right, dtype=np.intp), indexing="ij")
        return self.mul[self.mul[self.mul[self.inv[a], self.inv[b]], a], b].ravel()

    def normal_closure(self, generators: Iterable[int]) -> Subgroup:
        closure = self.generate(generators)
        while True:
            missing = []
            for g in self.generator_indices:
                images = self.conjugate_indices(closure.indices, g)
                outside = images[~closure.mask[images]]
                if outside.size:
                    missing.append(int(outside.min()))
            if not missing:
                return closure
            closure = self.generate(missing, start=closure)

    def subtable(self, subgroup: Subgroup, name: str | None = None) -> "GroupTable":
        """The subgroup as a GroupTable of its own, sharing this table's products."""
        indices = subgroup.indices
        position = np.full(self.order, -1, dtype=np.int32)
        position[indices] = np.arange(len(indices), dtype=np.int32)
        mul = position[self.mul[np.ix_(indices, indices)]]
        spec = GroupSpec(
            degree=self.degree, generators=[self.perm(g) for g in subgroup.generators], name=name
        )
        table = GroupTable(spec, self.elements[indices], mul=mul)
        table.__dict__["generator_indices"] = tuple(int(position[g]) for g in subgroup.generators)
        return table

    @cached_property
    def derived(self) -> Subgroup:
        generators = np.asarray(self.generator_indices, dtype=np.intp)
        return self.normal_closure(np.unique(self.commutators(generators, generators)))

    @cached_property
    def center(self) -> Subgroup:
        mask = np.ones(self.order, dtype=bool)
        for g in self.generator_indices:
            mask &= self.mul[:, g] == self.mul[g, :]
        return self.from_mask(mask)

    def agemo(self, ell: int) -> Subgroup:
        return self.generate(np.unique(self.power(ell)))

    def frattini(self, ell: int) -> Subgroup:
        """G^ℓ[G, G] for an ℓ-group: normal closure of generator ℓ-th powers and commutators."""
        generators = np.asarray(self.generator_indices, dtype=np.intp)
        seeds = np.concatenate([self.power(ell)[generators], self.commutators(generators, generators)])
        return self.normal_closure(np.unique(seeds))

    def cyclic_subgroups(self) -> list[Subgroup]:
        """Distinct cyclic subgroups, each carrying its least generator."""
        found: dict[bytes, Subgroup] = {}
        covered = np.zeros(self.order, dtype=bool)
        for x in range(self.order):
            if covered[x]:
                continue
            subgroup = self.cyclic(x)
            found.setdefault(subgroup.key, subgroup)
            generators = subgroup.indices[self.element_orders[subgroup.indices] == self.element_orders[x]]
            covered[generators] = True
        return list(found.values())


def closure(spec: GroupSpec, cap: int | None = None) -> GroupTable:
    """Enumerate the group generated by spec breadth first."""
    cap = settings.closure_cap if cap is None else cap
    if cap < 1:
        raise DomainError(f"cap={cap} must be at least 1")
    if spec.degree < 1:
        raise DomainError("closure needs a degree of at least 1")
    degree = spec.degree
    dtype = point_dtype(degree)
    identity = np.arange(degree, dtype=dtype)
    generators = np.array([g.images for g in spec.generators], dtype=dtype).reshape(len(spec.generators), degree)
    seen = {identity.tobytes()}
    layers = [identity[None, :]]
    frontier = identity[None, :]
    while frontier.shape[0] and generators.shape[0]:
        # generators[:, frontier][k, i] is "frontier element i, then generator k"
        candidates = np.unique(generators[:, frontier].reshape(-1, degree), axis=0)
        fresh = []
        for row in candidates:
            key = row.tobytes()
            if key not in seen:
                seen.add(key)
                fresh.append(row)
        if len(seen) > cap:
            raise CapExceeded(f"{spec.name or 'group'} has more than cap={cap} elements", partial_count=len(seen))
        frontier = np.array(fresh, dtype=dtype).reshape(-1, degree)
        layers.append(frontier)
    elements = np.unique(np.concatenate(layers), axis=0)
    logger.debug("closure of %s: %d elements", spec.name, len(elements))
    return GroupTable(spec, elements)


def derived_subgroup(G: GroupTable) -> GroupTable:
    return G.subtable(G.derived, name="derived")


def center(G: GroupTable) -> GroupTable:
    return G.subtable(G.center, name="center")


def agemo(G: GroupTable, ell: int) -> GroupTable:
    return G.subtable(G.agemo(ell), name="agemo")


def _require_ell_group(G: GroupTable, ell: int) -> None:
    base = prime_power_base(G.order)
    if G.order != 1 and base != ell:
        raise NotPrimePower(f"|G| = {G.order} is not a power of {ell}")


def d_frattini(G: GroupTable, ell: int) -> int:
    """d(G) = log_ℓ |G / Φ(G)| for an ℓ-group G."""
    _require_ell_group(G, ell)
    if G.order == 1:
        return 0
    return log_exact(G.order // G.frattini(ell).order, ell)


def _generating_search(G: GroupTable, max_d: int | None = None) -> tuple[int, ...]:
    """A generating tuple of least size, found level by level up to conjugacy."""
    max_d = settings.d_search_max if max_d is None else max_d
    if G.order == 1:
        return ()
    if G.order > settings.d_search_order_cap:
        raise CapExceeded(f"d_search needs |G| ≤ {settings.d_search_order_cap}, got {G.order}", G.order)
    cyclics = G.cyclic_subgroups()
    level: list[Subgroup] = [G.trivial()]
    for size in range(1, max_d + 1):
        seen: set[bytes] = set()
        following = []
        for subgroup in level:
            for cyclic in cyclics:
                x = cyclic.generators[0] if cyclic.generators else 0
                if subgroup.mask[x]:
                    continue
                joined = G.generate([x], start=subgroup)
                if joined.order == G.order:
                    return joined.generators
                if joined.key in seen:
                    continue
                seen.update(member.key for member in G.conjugacy_orbit(joined))
                following.append(joined)
        level = following
    raise SearchExhausted(f"d(G) > {max_d} for {G}")


def d_search(G: GroupTable, max_d: int | None = None) -> int:
    return len(_generating_search(G, max_d))


def subgroup_d(G: GroupTable, H: Subgroup) -> int:
    if H.order == 1:
        return 0
    table = G.subtable(H)
    ell = prime_power_base(H.order)
    if ell is not None:
        return d_frattini(table, ell)
    return d_search(table)


def minimal_generators(G: GroupTable) -> tuple[int, ...]:
    """Indices of a generating set of size d(G)."""
    if G.order == 1:
        return ()
    ell = prime_power_base(G.order)
    if ell is None:
        return _generating_search(G)
    current = G.frattini(ell)
    chosen: list[int] = []
    for x in range(G.order):
        if current.order == G.order:
            break
        if not current.mask[x]:
            current = G.generate([x], start=current)
            chosen.append(x)
    return tuple(chosen)


def subgroup_spec(G: GroupTable, H: Subgroup, name: str | None = None) -> GroupSpec:
    """H as a group file document with a generating set of size d(H)."""
    table = G.subtable(H)
    generators = [table.perm(i) for i in minimal_generators(table)]
    return GroupSpec(degree=G.degree, generators=generators, name=name)


@dataclass
class SubgroupClass:
    representative: Subgroup
    size: int


@dataclass
class SubgroupClassList:
    parent: GroupTable
    classes: list[SubgroupClass] = field(default_factory=list)
    exhaustive: bool = True

    @property
    def total(self) -> int:
        return sum(subgroup_class.size for subgroup_class in self.classes)

    def __len__(self):
        return len(self.classes)

    def __iter__(self) -> Iterator[SubgroupClass]:
        return iter(self.classes)


class ClassEnumerator:
    """
    Conjugacy classes of subgroups. ℓ-groups grow every class by cyclic
    extension inside its normalizer (each subgroup is normal of index ℓ in
    some larger one); other groups join class representatives with every
    cyclic subgroup. A whole conjugacy orbit is marked as seen when its first
    member appears.
    """

    def __init__(self, table: GroupTable, budget: int):
        self.table = table
        self.budget = budget
        self.ell = prime_power_base(table.order)
        self.seen: set[bytes] = set()
        self.classes: list[SubgroupClass] = []

    def result(self, exhaustive: bool) -> SubgroupClassList:
        classes = sorted(self.classes, key=lambda c: (c.representative.order, c.representative.sort_key()))
        return SubgroupClassList(parent=self.table, classes=classes, exhaustive=exhaustive)

    def add(self, subgroup: Subgroup) -> SubgroupClass | None:
        if subgroup.key in self.seen:
            return None
        if len(self.classes) >= self.budget:
            raise BudgetExceeded(
                f"more than {self.budget} subgroup classes in {self.table}", partial=self.result(exhaustive=False)
            )
        orbit = self.table.conjugacy_orbit(subgroup)
        self.seen.update(member.key for member in orbit)
        subgroup_class = SubgroupClass(min(orbit, key=Subgroup.sort_key), len(orbit))
        self.classes.append(subgroup_class)
        return subgroup_class

    def extensions(self, subgroup: Subgroup) -> Iterator[Subgroup]:
        table = self.table
        if self.ell is not None:
            normalizer = table.normalizer_mask(subgroup)
            candidates = normalizer & ~subgroup.mask & subgroup.mask[table.power(self.ell)]
            covered = subgroup.mask.copy()
            for x in np.flatnonzero(candidates):
                if covered[x]:
                    continue
                extension = table.generate([x], start=subgroup)
                covered |= extension.mask
                yield extension
        else:
            for cyclic in self.cyclics:
                x = cyclic.generators[0]
                if not subgroup.mask[x]:
                    yield table.generate([x], start=subgroup)

    @cached_property
    def cyclics(self) -> list[Subgroup]:
        return [c for c in self.table.cyclic_subgroups() if c.generators]

    def run(self) -> SubgroupClassList:
        queue = deque([self.add(self.table.trivial())])
        while queue:
            subgroup_class = queue.popleft()
            for extension in self.extensions(subgroup_class.representative):
                found = self.add(extension)
                if found is not None:
                    queue.append(found)
        logger.debug("%s: %d subgroup classes", self.table, len(self.classes))
        return self.result(exhaustive=True)


def subgroup_classes(G: GroupTable, budget: int | None = None) -> SubgroupClassList:
    budget = settings.class_budget if budget is None else budget
    return ClassEnumerator(G, budget).run()


@dataclass
class RankResult:
    value: int
    witness: Subgroup
    exhaustive: bool
    table: GroupTable

    def witness_spec(self, name: str | None = None) -> GroupSpec:
        return subgroup_spec(self.table, self.witness, name=name)


def rank(G: GroupTable, budget: int | None = None) -> RankResult:
    """
    rk(G) = max d(H) over subgroup class representatives. When the class
    budget runs out the value is a lower bound and exhaustive is False.
    """
    try:
        classes = subgroup_classes(G, budget)
    except BudgetExceeded as error:
        logger.warning("%s; rank is only a lower bound", error)
        classes = error.partial
    best, witness = -1, None
    for subgroup_class in sorted(classes, key=lambda c: c.representative.sort_key()):
        subgroup = subgroup_class.representative
        if witness is not None and big_omega(subgroup.order) <= best:
            continue
        value = subgroup_d(G, subgroup)
        if value > best:
            best, witness = value, subgroup
    assert witness is not None
    return RankResult(value=best, witness=witness, exhaustive=classes.exhaustive, table=G)


def omega1(G: GroupTable, ell: int) -> GroupTable:
    _require_ell_group(G, ell)
    return G.subtable(G.generate(np.flatnonzero(G.power(ell) == 0)), name="omega1")


def sylow(G: GroupTable, ell: int) -> GroupTable:
    """Grow an ℓ-subgroup inside its normalizer until it has the full ℓ-part of |G|."""
    target = ell ** factorint(G.order).get(ell, 0)
    current = G.trivial()
    powers = G.power(ell) if target > 1 else None
    while current.order < target:
        candidates = G.normalizer_mask(current) & ~current.mask & current.mask[powers]
        current = G.generate([int(np.flatnonzero(candidates)[0])], start=current)
    return G.subtable(current, name=f"sylow-{ell}")


def is_d_maximal(G: GroupTable, budget: int | None = None) -> bool:
    classes = subgroup_classes(G, budget)
    d_whole = subgroup_d(G, G.whole())
    return all(
        subgroup_d(G, c.representative) < d_whole for c in classes if c.representative.order < G.order
    )


def nilpotency_class(G: GroupTable) -> int:
    """Length of the lower central series."""
    generators = np.asarray(G.generator_indices, dtype=np.intp)
    current, length = G.whole(), 0
    while current.order > 1:
        following = G.normal_closure(np.unique(G.commutators(current.indices, generators)))
        if following.order == current.order:
            raise NotNilpotent(f"lower central series of {G} stops at order {current.order}")
        current, length = following, length + 1
    return length
