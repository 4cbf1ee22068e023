import asyncio
import logging

from ..adapters.filesystem import AbstractFilesystem, dumps_group
from ..config import settings
from ..domain import arith, commands, constructions, events, model, verify
from ..domain.exceptions import DomainError
from ..service_layer.unit_of_work import AbstractUnitOfWork
from . import suites


logger = logging.getLogger(__name__)


async def compute_invariants(command: commands.ComputeInvariants, uow: AbstractUnitOfWork):
    triple = arith.invariant_triple(command.p, command.ell)
    outcome = model.Outcome(events.InvariantsComputed, **triple.model_dump())
    async with uow:
        await uow.outcomes.add(outcome)
        outcome.announce()
        await uow.commit()


async def build_group(command: commands.BuildGroup, uow: AbstractUnitOfWork, fs: AbstractFilesystem):
    """Build a registered construction and write its canonical group file."""
    target = model.Target(builder=command.builder, params=command.params)
    spec = await asyncio.to_thread(constructions.build, target)
    if command.out is not None:
        document = fs.write_group(command.out, spec)
    else:
        document = dumps_group(spec)
    outcome = model.Outcome(events.GroupBuilt, **spec.dict(), document=document)
    async with uow:
        await uow.outcomes.add(outcome)
        outcome.announce()
        await uow.commit()


async def compute_rank(command: commands.ComputeRank, uow: AbstractUnitOfWork, fs: AbstractFilesystem):
    group, document = fs.read_group(command.path)
    if isinstance(group, model.MatrixGroupSpec):
        spec = await asyncio.to_thread(constructions.matrix_to_perm, group)
        spec.descriptor = group.descriptor
    else:
        spec = group
    if command.method == "formula" and spec.descriptor is None:
        raise DomainError(f"{command.path} has no construction descriptor; --method formula needs one")
    content = spec.descriptor.canonical() if spec.descriptor is not None else dumps_group(spec)
    async with uow:
        report = await suites.cached_report(
            uow,
            spec=spec,
            content=content,
            method=command.method,
            budget=command.budget,
            use_cache=command.use_cache,
        )
        report.compute()
        await uow.commit()


async def run_suite(command: commands.RunSuite, uow: AbstractUnitOfWork):
    seed = settings.default_seed if command.seed is None else command.seed
    async with uow:
        rows = await suites.collect_rows(command.name, command.params, seed, uow, command.use_cache)
        run = model.SuiteRun(name=command.name, seed=seed)
        for row in rows:
            row = dict(row)
            run.add_row(row.pop("target"), row.pop("expected"), row.pop("observed"), row.pop("passed"), **row)
        await uow.outcomes.add(run)
        run.finish()
        await uow.commit()


async def build_table(command: commands.BuildTable, uow: AbstractUnitOfWork):
    """rk_ℓ(GL_d(F_p)) over the grid, rows in ascending (p, ℓ, d)."""
    if not (command.ps and command.ells and command.ds):
        raise DomainError("table ranges must not be empty")
    rows = []
    for p in sorted(set(command.ps)):
        for ell in sorted(set(command.ells)):
            for d in sorted(set(command.ds)):
                value, case = verify.gl_rank_formula(p, ell, d)
                rows.append({"p": p, "ell": ell, "d": d, "value": value, "case": case})
    outcome = model.Outcome(events.TableBuilt, rows=rows)
    async with uow:
        await uow.outcomes.add(outcome)
        outcome.announce()
        await uow.commit()


async def log_rank_computed(event: events.RankComputed):
    logger.info("%s: %s (formula=%s, brute=%s)", event.key[:12], event.status, event.formula_value, event.brute_value)


async def log_suite_finished(event: events.SuiteFinished):
    failed = sum(not row["passed"] for row in event.rows)
    logger.info("suite %s finished: %d rows, %d failed", event.name, len(event.rows), failed)


async def log_event(event: events.Event):
    logger.debug("%s event", event.type)


EVENT_HANDLERS: dict[type[events.Event], list] = {
    events.InvariantsComputed: [log_event],
    events.GroupBuilt: [log_event],
    events.RankComputed: [log_rank_computed],
    events.SuiteFinished: [log_suite_finished],
    events.TableBuilt: [log_event],
}

COMMAND_HANDLERS = {
    commands.ComputeInvariants: compute_invariants,
    commands.BuildGroup: build_group,
    commands.ComputeRank: compute_rank,
    commands.RunSuite: run_suite,
    commands.BuildTable: build_table,
}
