import asyncio
import logging
import sys

from collections.abc import Coroutine
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import typer

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .. import views
from ..bootstrap import get_bus_for_cli
from ..config import settings
from ..domain import commands, events
from ..domain.exceptions import DomainError, RankLabError, VerificationMismatch
from ..domain.model import ReportStatus


cli = typer.Typer(help="Ranks of finite groups: invariants, constructions, brute force and formula checks.")
EXTRA_ARGS = {"allow_extra_args": True, "ignore_unknown_options": True}
# flag name on the command line -> builder parameter
ALIASES = {"l": "ell"}

logger = logging.getLogger(__name__)


class Method(str, Enum):
    brute = "brute"
    formula = "formula"
    both = "both"


class TableFormat(str, Enum):
    csv = "csv"
    structured = "structured"


class SuiteFormat(str, Enum):
    table = "table"
    structured = "structured"


def configure_logging(level: str) -> None:
    handler = RichHandler(console=Console(stderr=True), show_path=False)
    logging.basicConfig(level=level.upper(), format="%(message)s", handlers=[handler], force=True)


def parse_values(text: str) -> list[int]:
    """'3', '3,5' or '1-3' (inclusive), combinable: '1-3,7'."""
    values: list[int] = []
    try:
        for part in text.split(","):
            low, dash, high = part.strip().partition("-")
            if dash:
                if int(high) < int(low):
                    raise ValueError(part)
                values.extend(range(int(low), int(high) + 1))
            else:
                values.append(int(low))
    except ValueError:
        raise DomainError(f"malformed range {text!r}; use e.g. 3, 3,5 or 1-3") from None
    return values


def parse_flags(args: list[str], aliases: dict[str, str] | None = None) -> dict[str, list[int]]:
    """Free-form '--name value' pairs; repeated flags accumulate."""
    aliases = aliases or {}
    flags: dict[str, list[int]] = {}
    tokens = iter(args)
    for token in tokens:
        if not token.startswith("--"):
            raise DomainError(f"unexpected argument {token!r}")
        name, equals, value = token[2:].partition("=")
        if not equals:
            value = next(tokens, None)
            if value is None:
                raise DomainError(f"flag --{name} needs a value")
        flags.setdefault(aliases.get(name, name), []).extend(parse_values(value))
    return flags


def fail(error: RankLabError) -> typer.Exit:
    sys.stderr.write(views.dumps(error.detail()).decode())
    return typer.Exit(code=error.exit_code)


def run(coroutine: Coroutine) -> Any:
    """Run a bus interaction; library errors become their exit codes."""
    try:
        return asyncio.run(coroutine)
    except RankLabError as error:
        raise fail(error) from None
    except ValidationError as error:
        raise fail(DomainError(str(error))) from None


class Capture:
    event: events.Event | None = None

    async def __call__(self, event: events.Event):
        self.event = event


async def send(command: commands.Command, event_type: type[events.Event], use_cache: bool = True) -> Any:
    bus = get_bus_for_cli(use_cache=use_cache)
    capture = Capture()
    bus.event_handlers[event_type].append(capture)
    await bus.handle(command)
    return capture.event


def echo(document: bytes | str) -> None:
    if isinstance(document, bytes):
        document = document.decode()
    typer.echo(document, nl=not document.endswith("\n"))


@cli.callback()
def main(log_level: str = typer.Option("WARNING", "--log-level", help="Logging level for stderr.")):
    configure_logging(log_level)


@cli.command()
def invariants(
    p: int = typer.Option(..., "--p", help="Odd prime p."),
    ell: int = typer.Option(..., "--l", help="Prime ℓ."),
):
    """Print m(p, ℓ), a(p, ℓ) and, for ℓ = 2 and p ≡ 3 mod 4, c(p)."""
    event = run(send(commands.ComputeInvariants(p=p, ell=ell), events.InvariantsComputed))
    echo(views.dumps(views.invariants_document(event)))


@cli.command(context_settings=EXTRA_ARGS)
def build(
    ctx: typer.Context,
    builder: str = typer.Argument(..., help="Construction name, e.g. xgroup or sylow-sym."),
    out: Optional[Path] = typer.Option(None, "--out", help="Group file to write; stdout when omitted."),
):
    """
    Build a construction and emit its group file. Parameters follow the
    builder name as flags: build xgroup --l 2 --a 2 --r 1
    """
    try:
        flags = parse_flags(ctx.args, ALIASES)
        params = {name: values[0] for name, values in flags.items() if len(values) == 1}
        if len(params) != len(flags):
            raise DomainError("builder parameters take a single value each")
    except DomainError as error:
        raise fail(error) from None
    event = run(send(commands.BuildGroup(builder=builder, params=params, out=out), events.GroupBuilt))
    if out is None:
        echo(event.document)


@cli.command()
def rank(
    path: Path = typer.Argument(..., help="Group file."),
    method: Method = typer.Option(Method.both, "--method"),
    budget: Optional[int] = typer.Option(None, "--budget", help="Subgroup class budget."),
    no_cache: bool = typer.Option(False, "--no-cache"),
    timings: bool = typer.Option(False, "--timings", help="Include wall time and cache flag."),
):
    """Rank of the group in PATH by brute force, by formula, or both."""
    command = commands.ComputeRank(path=path, method=method.value, budget=budget, use_cache=not no_cache)
    event = run(send(command, events.RankComputed, use_cache=not no_cache))
    echo(views.dumps(views.report_document(event, timings)))
    if event.status == ReportStatus.LOWER_BOUND_ONLY.value:
        logger.warning("budget reached: %s is a lower bound", event.brute_value)
    if event.status == ReportStatus.MISMATCH.value:
        raise fail(VerificationMismatch("formula and brute force disagree", views.report_document(event)))


@cli.command(context_settings=EXTRA_ARGS)
def verify(
    ctx: typer.Context,
    suite: str = typer.Argument(..., help="Suite name, e.g. xgroups, gl, lemma-monomial."),
    seed: int = typer.Option(settings.default_seed, "--seed"),
    no_cache: bool = typer.Option(False, "--no-cache"),
    timings: bool = typer.Option(False, "--timings"),
    output: SuiteFormat = typer.Option(SuiteFormat.table, "--format"),
):
    """
    Run a named suite over a parameter grid given as flags, e.g.
    verify xgroups --l 2 --amax 2 --rmax 1. Exits 0 iff every row passes.
    """
    try:
        params = parse_flags(ctx.args)
    except DomainError as error:
        raise fail(error) from None
    command = commands.RunSuite(name=suite, params=params, seed=seed, use_cache=not no_cache)
    event = run(send(command, events.SuiteFinished, use_cache=not no_cache))
    if output == SuiteFormat.structured:
        echo(views.dumps(views.suite_document(event, timings)))
    else:
        console = Console(width=160)
        console.print(views.suite_table(event, timings))
        console.print(views.suite_summary(event))
    if not event.passed:
        failed = [row["target"] for row in event.rows if not row["passed"]]
        raise fail(VerificationMismatch(f"suite {suite} has failing rows", {"failed": failed}))


@cli.command()
def table(
    p: str = typer.Option("3,5", "--p", help="Primes p, e.g. 3,5."),
    ell: str = typer.Option("2", "--l", help="Primes ℓ."),
    d: str = typer.Option("1-3", "--d", help="Dimensions."),
    output: TableFormat = typer.Option(TableFormat.csv, "--format"),
):
    """Tabulate rk_ℓ(GL_d(F_p)) with the case that produced each value."""
    try:
        command = commands.BuildTable(ps=parse_values(p), ells=parse_values(ell), ds=parse_values(d))
    except DomainError as error:
        raise fail(error) from None
    event = run(send(command, events.TableBuilt))
    if output == TableFormat.csv:
        echo(views.table_csv(event))
    else:
        echo(views.dumps(event.rows))


if __name__ == "__main__":
    cli()
