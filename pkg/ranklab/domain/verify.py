"""
Closed-form rank formulas and the harness that compares them with the
brute-force rank of the constructed groups.
"""
import itertools
import logging
import time

from dataclasses import dataclass, field

from sympy import primerange

from . import arith, constructions, permgroup
from .exceptions import BudgetExceeded, DomainError, ResourceError
from .model import GroupSpec, RankReport, ReportStatus, Target, decide_status


logger = logging.getLogger(__name__)


def _require_odd_prime(p: int) -> None:
    arith.require_prime(p, "p")
    if p == 2:
        raise DomainError("p must be odd")


def gl_rank_formula(p: int, ell: int, d: int) -> tuple[int, str]:
    """rk_ℓ(GL_d(F_p)) and the tag of the case that produced it."""
    _require_odd_prime(p)
    arith.require_prime(ell, "ell")
    if ell == p:
        raise DomainError(f"ell must differ from p={p}")
    if d < 1:
        raise DomainError(f"d={d} must be at least 1")
    if p % ell != 1:
        return d // arith.mult_order(p, ell), "floor-d-over-m"
    if ell == 2 and p % 4 == 1:
        return (3 * d - d % 2) // 2, "three-halves"
    return d, "d"


def x_rank_formula(ell: int, a: int, r: int) -> int:
    arith.require_prime(ell, "ell")
    if a < 1 or r < 0:
        raise DomainError(f"need a ≥ 1 and r ≥ 0, got a={a}, r={r}")
    if ell == 2 and a >= 2 and r >= 1:
        return 3 * 2 ** (r - 1)
    return ell**r


def y_rank_formula(c: int, r: int) -> int:
    if c < 3 or r < 0:
        raise DomainError(f"need c ≥ 3 and r ≥ 0, got c={c}, r={r}")
    return 2 ** (r + 1)


def qp_max_p_rank(p: int, d: int) -> int:
    _require_odd_prime(p)
    if d < 1:
        raise DomainError(f"d={d} must be at least 1")
    return d // (p - 1)


def thmA_rk2_bound(p: int, dim: int) -> int:
    """Bound on the 2-rank of a p-adic analytic group of dimension dim."""
    _require_odd_prime(p)
    if dim < 0:
        raise DomainError(f"dim={dim} must be nonnegative")
    if p % 4 == 1:
        return 3 * dim // 2
    return dim


def sym_sylow_rank_formula(n: int, ell: int) -> int:
    arith.require_prime(ell, "ell")
    if n < 0:
        raise DomainError(f"n={n} must be nonnegative")
    return n // ell


def formula_for(target: Target) -> tuple[int, str] | None:
    """Closed-form rank for a target, None when no formula covers it."""
    params = target.params
    match target.builder:
        case "xgroup":
            return x_rank_formula(params["ell"], params["a"], params["r"]), "x"
        case "ygroup":
            return y_rank_formula(params["c"], params["r"]), "y"
        case "semidihedral":
            return y_rank_formula(params["c"], 0), "y"
        case "iterated-wreath":
            if params["r"] == 0:
                return 0, "trivial"
            return x_rank_formula(params["ell"], 1, params["r"] - 1), "x"
        case "sylow-sym":
            return sym_sylow_rank_formula(params["n"], params["ell"]), "sym-sylow"
        case "gl-sylow":
            return gl_rank_formula(params["p"], params["ell"], params["d"])
        case "qp-max-p":
            return qp_max_p_rank(params["p"], params["d"]), "qp-max-p"
        case "dihedral":
            return 2, "dihedral"
        case "dihedral-power":
            return 2 * params["r"], "dihedral"
        case "abelian":
            return sum(params[name] > 0 for name in ("a", "b", "c")), "abelian"
        case "heisenberg":
            return 2, "extraspecial"
        case "remark-s":
            return thmA_rk2_bound(params["p"], 2), "thm-a"
        case "remark-affine":
            return params["d"] + 1, "affine"
        case "cyclic":
            return (1 if params["n"] > 1 else 0), "cyclic"
    return None


def exact_rank(table: permgroup.GroupTable, budget: int | None = None) -> permgroup.RankResult:
    result = permgroup.rank(table, budget)
    if not result.exhaustive:
        raise BudgetExceeded(f"subgroup classes of {table} exceed the budget", partial=result)
    return result


def crosscheck(
    target: Target | None = None,
    budget: int | None = None,
    method: str = "both",
    spec: GroupSpec | None = None,
) -> RankReport:
    """
    Brute-force rank next to the closed-form value. Caps and budgets never
    produce a Match: a cap leaves the brute value out, a budget leaves only a
    lower bound.
    """
    if spec is None:
        if target is None:
            raise DomainError("crosscheck needs a target or a group")
        target = constructions.resolve(target)[1]
    elif target is None and spec.descriptor is not None:
        target = constructions.resolve(spec.descriptor)[1]
    elif target is None:
        target = Target(builder=spec.name or "group")
    formula = formula_for(target) if method in ("formula", "both") else None
    brute_value, witness, exhaustive, capped = None, None, False, False
    started = time.perf_counter()
    if method in ("brute", "both"):
        try:
            table = permgroup.closure(spec or constructions.build(target))
            result = permgroup.rank(table, budget)
            brute_value, exhaustive = result.value, result.exhaustive
            witness = result.witness_spec(name="witness").dict()
            capped = budget is None and not exhaustive
        except ResourceError as error:
            logger.warning("brute force skipped for %s: %s", target.label(), error)
            capped = True
    formula_value, case = formula if formula is not None else (None, None)
    status = decide_status(formula_value, brute_value, exhaustive)
    if method == "formula" and formula_value is None:
        raise DomainError(f"no rank formula is known for {target.label()}")
    if method == "formula":
        status = ReportStatus.BRUTE_SKIPPED
    return RankReport(
        target=target,
        formula_value=formula_value,
        brute_value=brute_value,
        witness=witness,
        status=status,
        case=case,
        wall_time=time.perf_counter() - started,
        capped=capped,
    )


@dataclass
class BoundCheck:
    """Values entering one inequality check, and whether it held."""

    name: str
    holds: bool
    values: dict = field(default_factory=dict)

    def dict(self):
        return {"name": self.name, "holds": self.holds, **self.values}


def sylow_ranks(table: permgroup.GroupTable, budget: int | None = None) -> dict[int, int]:
    return {
        ell: exact_rank(permgroup.sylow(table, ell), budget).value
        for ell in permgroup.prime_divisors(table.order)
    }


def guralnick_lucchini_check(table: permgroup.GroupTable, budget: int | None = None) -> BoundCheck:
    """rk(G) ≤ max over primes ℓ of rk_ℓ(G), plus one."""
    rank = exact_rank(table, budget).value
    ranks = sylow_ranks(table, budget)
    bound = max(ranks.values(), default=0) + 1
    return BoundCheck(
        name="rank-vs-sylow-ranks",
        holds=rank <= bound,
        values={"rank": rank, "sylow_ranks": {str(ell): value for ell, value in ranks.items()}, "bound": bound},
    )


def gl_bound_check(table: permgroup.GroupTable, p: int, d: int, budget: int | None = None) -> BoundCheck:
    """
    On an affine model T ⋉ (Z/p^k)^d: rk_ℓ ≤ rk_ℓ(GL_d(F_p)) for every prime
    ℓ ≠ p dividing |G|, rk_2 ≤ the 2-rank bound in dimension d, and rk_p = d.
    """
    ranks = sylow_ranks(table, budget)
    checks = {}
    for ell, value in ranks.items():
        if ell == p:
            checks[str(ell)] = {"rank": value, "bound": d, "holds": value == d}
            continue
        bound = gl_rank_formula(p, ell, d)[0]
        if ell == 2:
            bound = min(bound, thmA_rk2_bound(p, d))
        checks[str(ell)] = {"rank": value, "bound": bound, "holds": value <= bound}
    holds = all(check["holds"] for check in checks.values()) and ranks.get(p) == d
    return BoundCheck(name="gl-bound", holds=holds, values={"p": p, "d": d, "primes": checks})


def dmaximal_class_check(table: permgroup.GroupTable, budget: int | None = None) -> BoundCheck:
    """A d-maximal group of odd prime-power order has nilpotency class at most 2."""
    d_maximal = permgroup.is_d_maximal(table, budget)
    nilpotency = permgroup.nilpotency_class(table)
    return BoundCheck(
        name="d-maximal-class",
        holds=not d_maximal or nilpotency <= 2,
        values={"d_maximal": d_maximal, "class": nilpotency},
    )


def laffey_check(table: permgroup.GroupTable, ell: int) -> BoundCheck:
    """d(G) ≤ log_ℓ |Ω₁(G)|."""
    d = permgroup.d_frattini(table, ell)
    omega = permgroup.log_exact(permgroup.omega1(table, ell).order, ell)
    return BoundCheck(name="omega1", holds=d <= omega, values={"d": d, "log_omega1": omega})


def _target(builder: str, **params: int) -> Target:
    return Target(builder=builder, params=params)


CORPUS_MAX_ORDER = 512


def wreath_family(max_order: int = CORPUS_MAX_ORDER) -> list[Target]:
    """
    Every W_r(ℓ), X_{a,r}(ℓ) and Y_{c,r} of order at most max_order, each group
    once: X_{1,r}(ℓ) is W_{r+1}(ℓ), so iterated wreaths start at r = 2.
    """
    targets = []
    for ell in primerange(2, max_order + 1):
        for r in itertools.count():
            top = arith.wreath_order(ell, r)
            if ell**ell**r * top > max_order:
                break
            if r >= 1:
                targets.append(_target("iterated-wreath", ell=ell, r=r + 1))
            a = 1 if r == 0 else 2
            while ell ** (a * ell**r) * top <= max_order:
                targets.append(_target("xgroup", ell=ell, a=a, r=r))
                a += 1
    for r in itertools.count():
        top = arith.wreath_order(2, r)
        if 2 ** (4 * 2**r) * top > max_order:
            break
        c = 3
        while 2 ** ((c + 1) * 2**r) * top <= max_order:
            targets.append(_target("ygroup", c=c, r=r))
            c += 1
    return targets


CORPUS: list[Target] = [
    *wreath_family(),
    _target("symmetric", n=4),
    _target("gl", d=2, p=3),
    _target("remark-s", p=5, k=1),
    _target("remark-affine", p=3, m=2, d=2, k=2),
    _target("dihedral-power", k=2, r=2),
    # odd orders, d-maximal and not
    _target("gl-sylow", d=2, p=7, ell=3),
    _target("abelian", ell=3, a=1, b=1, c=1),
    _target("abelian", ell=5, a=1, b=1),
    _target("abelian", ell=3, a=2, b=1),
    _target("heisenberg", p=3),
]


def corpus_checks(target: Target, budget: int | None = None) -> list[BoundCheck]:
    """Rank against Sylow ranks for every corpus group; class and Ω₁ checks for odd prime-power orders."""
    table = permgroup.closure(constructions.build(target))
    checks = [guralnick_lucchini_check(table, budget)]
    ell = permgroup.prime_power_base(table.order)
    if ell is not None and ell != 2:
        checks.append(dmaximal_class_check(table, budget))
        checks.append(laffey_check(table, ell))
    return checks
