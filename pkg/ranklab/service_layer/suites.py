"""
Named verification suites. Each suite turns its grid parameters into rows
(target, expected, observed, passed, detail); independent rows run in worker
threads and the rows are reported sorted by target.
"""
import asyncio
import itertools
import logging

from collections.abc import Awaitable, Callable
from dataclasses import dataclass, field

from sympy import primerange

from ..config import settings
from ..domain import arith, constructions, latmod, permgroup, verify
from ..domain.exceptions import DomainError, PrecisionError
from ..domain.model import GroupSpec, RankReport, ReportStatus, Target, cache_key
from .unit_of_work import AbstractUnitOfWork


logger = logging.getLogger(__name__)

Params = dict[str, int | list[int]]
Row = dict


def as_list(value: int | list[int]) -> list[int]:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def as_int(params: Params, name: str) -> int:
    value = params[name]
    if isinstance(value, (list, tuple)):
        if len(value) != 1:
            raise DomainError(f"--{name} takes a single value, got {value}")
        return value[0]
    return value


async def run_in_workers(jobs: list[Callable[[], Awaitable[Row]]]) -> list[Row]:
    semaphore = asyncio.Semaphore(max(1, settings.workers))

    async def run(job):
        async with semaphore:
            return await job()

    return list(await asyncio.gather(*(run(job) for job in jobs)))


async def cached_report(
    uow: AbstractUnitOfWork,
    *,
    target: Target | None = None,
    spec: GroupSpec | None = None,
    content: bytes | None = None,
    method: str = "both",
    budget: int | None = None,
    use_cache: bool = True,
) -> RankReport:
    """
    Cross-check one group, served from the report cache when the same content
    was checked with the same method, budget and tool version before.
    """
    if content is None:
        if target is None:
            raise DomainError("a report needs a target or the group document")
        content = constructions.resolve(target)[1].canonical()
    variant = method if budget is None else f"{method}:{budget}"
    key = cache_key(content, variant, uow.reports.tool_version)
    if use_cache:
        cached = await uow.reports.get(key)
        if cached is not None:
            logger.debug("cache hit for %s", cached.target.label())
            return cached
    report = await asyncio.to_thread(verify.crosscheck, target, budget, method, spec)
    report.key = key
    if report.capped:
        logger.info("not caching %s, the result depends on the configured caps", report.target.label())
    if use_cache and not report.capped:
        await uow.reports.add(report)
    else:
        uow.reports.track(report)
    return report


def report_row(report: RankReport) -> Row:
    return {
        "target": report.target.label(),
        "expected": report.formula_value,
        "observed": report.brute_value,
        "passed": report.status == ReportStatus.MATCH,
        "status": report.status.value,
        "case": report.case,
        "wall_time": report.wall_time,
    }


def crosscheck_jobs(targets: list[Target], uow: AbstractUnitOfWork, use_cache: bool) -> list:
    def job(target):
        async def run():
            return report_row(await cached_report(uow, target=target, use_cache=use_cache))

        return run

    return [job(target) for target in targets]


def thread_jobs(function: Callable[..., Row], arguments: list[tuple]) -> list:
    def job(args):
        async def run():
            return await asyncio.to_thread(function, *args)

        return run

    return [job(args) for args in arguments]


def xgroups(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    targets = [
        Target(builder="xgroup", params={"ell": ell, "a": a, "r": r})
        for ell in as_list(params["l"])
        for a in range(1, as_int(params, "amax") + 1)
        for r in range(as_int(params, "rmax") + 1)
    ]
    return crosscheck_jobs(targets, uow, use_cache)


def ygroups(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    targets = [
        Target(builder="ygroup", params={"c": c, "r": r})
        for c in as_list(params["c"])
        for r in range(as_int(params, "rmax") + 1)
    ]
    return crosscheck_jobs(targets, uow, use_cache)


def gl(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    targets = [
        Target(builder="gl-sylow", params={"d": d, "p": p, "ell": ell})
        for p, d, ell in itertools.product(as_list(params["p"]), as_list(params["d"]), as_list(params["l"]))
        if ell != p
    ]
    return crosscheck_jobs(targets, uow, use_cache)


def qp_max(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    targets = [
        Target(builder="qp-max-p", params={"p": p, "d": d})
        for p, d in itertools.product(as_list(params["p"]), as_list(params["d"]))
    ]
    return crosscheck_jobs(targets, uow, use_cache)


def lemma_row(ell: int, n: int, k: int, trials: int, seed: int) -> Row:
    report = latmod.verify_lemma32(ell, n, k, trials=trials, seed=seed)
    return {
        "target": f"monomial(ell={ell},k={k},n={n})",
        "expected": report.bound,
        "observed": report.max_observed,
        "passed": report.violations == 0,
        **report.dict(),
    }


def lemma_monomial(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    ells = as_list(params["l"])
    if "n" in params:
        pairs = [(ell, n) for ell, n in itertools.product(ells, as_list(params["n"])) if n % ell == 0]
    else:
        pairs = [(ell, multiple * ell) for ell in ells for multiple in (1, 2)]
    if not pairs:
        raise DomainError("no (l, n) pair with n a multiple of l")
    trials = as_int(params, "trials")
    arguments = [(ell, n, k, trials, seed) for ell, n in pairs for k in as_list(params["k"])]
    return thread_jobs(lemma_row, arguments)


def prop_key_row(name: str, group) -> Row:
    result = latmod.verify_prop_key(group, name)
    return {
        "target": name,
        "expected": result.rank,
        "observed": result.d_group + result.d_module,
        "passed": result.holds,
        **result.dict(),
    }


def prop_key(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    arguments = [
        instance
        for p, k in itertools.product(as_list(params["p"]), as_list(params["k"]))
        for instance in latmod.prop_key_instances(p, k, seed)
    ]
    return thread_jobs(prop_key_row, arguments)


def gl_bound_row(label: str, spec: GroupSpec, p: int, d: int) -> Row:
    check = verify.gl_bound_check(permgroup.closure(spec), p, d)
    return {"target": label, "expected": d, "observed": check.values["primes"], "passed": check.holds}


def gl_bound(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    """Affine models Sylow_ℓ(GL_d(F_p)) ⋉ F_p^d, plus S ⋉ F_p² when p ≡ 1 mod 4."""
    arguments = []
    for p, d in itertools.product(as_list(params["p"]), as_list(params["d"])):
        for ell in permgroup.prime_divisors(arith.gl_order(d, p)):
            if ell == p:
                continue
            sylow = constructions.gl_sylow_matrix(d, p, ell)
            arguments.append((f"affine(d={d},ell={ell},p={p})", constructions.affine_group(sylow), p, d))
        if d == 2 and p % 4 == 1:
            arguments.append((f"remark-s-affine(k=1,p={p})", constructions.remark_s_affine(p), p, d))
    return thread_jobs(gl_bound_row, arguments)


def remark_examples(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    """Three-generator group S, the scalar affine model and the dihedral power."""
    p = as_int(params, "p")

    def s_generators() -> Row:
        group = constructions.remark_s_group(p)
        d = permgroup.d_frattini(permgroup.closure(constructions.matrix_to_perm(group)), 2)
        irreducible = not constructions.has_invariant_line(group)
        return {
            "target": f"d(remark-s(k=1,p={p}))",
            "expected": 3,
            "observed": d,
            "passed": d == 3 and irreducible,
            "irreducible": irreducible,
        }

    targets = [
        Target(builder="remark-s", params={"p": p, "k": 1}),
        Target(builder="remark-affine", params={"p": 3, "m": 2, "d": 2, "k": 2}),
        Target(builder="dihedral-power", params={"k": 2, "r": 2}),
    ]
    return thread_jobs(s_generators, [()]) + crosscheck_jobs(targets, uow, use_cache)


def sylow_sym_row(n: int, ell: int) -> Row:
    expected = ell ** arith.sylow_sym_valuation(n, ell)
    observed = permgroup.closure(constructions.sylow_sym(n, ell)).order
    return {"target": f"sylow-sym(ell={ell},n={n:02d})", "expected": expected, "observed": observed, "passed": expected == observed}


def sylow_sym(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    arguments = [(n, ell) for ell in as_list(params["l"]) for n in range(as_int(params, "nmax") + 1)]
    return thread_jobs(sylow_sym_row, arguments)


def heller_reiner_row(p: int, k: int, a: int, b: int, c: int, seed: int) -> Row:
    expected = {"a": a, "b": b, "c": c}
    found = latmod.hr_decompose(latmod.hr_module(p, k, a, b, c, seed), p, k)
    finer = latmod.hr_decompose(latmod.hr_module(p, k + 1, a, b, c, seed), p, k + 1)
    if found != finer:
        raise PrecisionError(f"decomposition of a={a}, b={b}, c={c} changes between k={k} and k={k + 1}")
    return {
        "target": f"hr(a={a},b={b},c={c},k={k},p={p})",
        "expected": expected,
        "observed": found.model_dump(),
        "passed": found.model_dump() == expected,
    }


def heller_reiner(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    max_rank = as_int(params, "maxrank")
    arguments = []
    for p, k in itertools.product(as_list(params["p"]), as_list(params["k"])):
        for a, b, c in itertools.product(range(max_rank + 1), repeat=3):
            rank = a + b * (p - 1) + c * p
            if 0 < rank <= max_rank:
                arguments.append((p, k, a, b, c, seed))
    return thread_jobs(heller_reiner_row, arguments)


def corpus_rows(target: Target) -> list[Row]:
    return [
        {"target": f"{target.label()}:{check.name}", "expected": True, "observed": check.holds, "passed": check.holds}
        | {key: value for key, value in check.values.items()}
        for check in verify.corpus_checks(target)
    ]


def corpus(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    def job(target):
        async def run():
            return await asyncio.to_thread(corpus_rows, target)

        return run

    return [job(target) for target in verify.CORPUS]


def naive_invariants(p: int, ell: int) -> tuple[int, int, int | None]:
    """m, a and c by direct loops, independent of the arith helpers."""
    if p == ell:
        m, a = p - 1, 1
    else:
        m = 1
        while (p**m - 1) % ell:
            m += 1
        a, value = 0, p**m - 1
        while value % ell == 0:
            value //= ell
            a += 1
    c = None
    if ell == 2 and p % 4 == 3:
        c, value = 0, p * p - 1
        while value % 2 == 0:
            value //= 2
            c += 1
    return m, a, c


def invariants_row(p: int, ell: int) -> Row:
    triple = arith.invariant_triple(p, ell)
    m, a, c = naive_invariants(p, ell)
    return {
        "target": f"invariants(ell={ell:02d},p={p:02d})",
        "expected": {"m": m, "a": a, "c": c},
        "observed": {"m": triple.m, "a": triple.a, "c": triple.c},
        "passed": (triple.m, triple.a, triple.c) == (m, a, c),
    }


def invariants(params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list:
    arguments = [
        (p, ell) for p in primerange(3, as_int(params, "pmax")) for ell in primerange(2, as_int(params, "lmax"))
    ]
    return thread_jobs(invariants_row, arguments)


@dataclass(frozen=True)
class Suite:
    jobs: Callable[[Params, int, AbstractUnitOfWork, bool], list]
    defaults: Params = field(default_factory=dict)
    optional: tuple[str, ...] = ()

    def params(self, given: Params) -> Params:
        unknown = set(given) - set(self.defaults) - set(self.optional)
        if unknown:
            known = sorted({*self.defaults, *self.optional})
            raise DomainError(f"unknown grid parameters {sorted(unknown)}; known: {known}")
        return self.defaults | given


SUITES: dict[str, Suite] = {
    "xgroups": Suite(xgroups, {"l": [2], "amax": 2, "rmax": 1}),
    "ygroups": Suite(ygroups, {"c": [3], "rmax": 1}),
    "gl": Suite(gl, {"p": [3, 5], "d": [1, 2], "l": [2, 3]}),
    "lemma-monomial": Suite(lemma_monomial, {"l": [2, 3], "k": [2, 3], "trials": settings.default_trials}, ("n",)),
    "prop-key": Suite(prop_key, {"p": [3, 5], "k": [1, 2]}),
    "gl-bound": Suite(gl_bound, {"p": [3, 5], "d": [1, 2]}),
    "remark-examples": Suite(remark_examples, {"p": 5}),
    "sylow-sym": Suite(sylow_sym, {"l": [2, 3, 5], "nmax": 20}),
    "heller-reiner": Suite(heller_reiner, {"p": [3, 5], "k": [2, 3], "maxrank": 8}),
    "corpus": Suite(corpus),
    "invariants": Suite(invariants, {"pmax": 50, "lmax": 20}),
    "qp-max": Suite(qp_max, {"p": [3, 5], "d": [1, 2, 3, 4]}),
}


def get_suite(name: str) -> Suite:
    try:
        return SUITES[name]
    except KeyError:
        raise DomainError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}") from None


async def collect_rows(name: str, params: Params, seed: int, uow: AbstractUnitOfWork, use_cache: bool) -> list[Row]:
    suite = get_suite(name)
    jobs = suite.jobs(suite.params(params), seed, uow, use_cache)
    rows = []
    for result in await run_in_workers(jobs):
        rows.extend(result if isinstance(result, list) else [result])
    logger.info("suite %s: %d rows", name, len(rows))
    return rows
