"""Command-line interface for the qkz verification suite."""

import click
import logging
from pathlib import Path
from typing import List, Optional

import toml
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .config import SuiteConfig
from .errors import ConfigError

console = Console()
logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False, config: Optional[SuiteConfig] = None):
    """Configure logging with a rich console handler and rotated log files."""
    from qkz.logging_config import setup_logging as setup_qkz_logging

    logging_config = None
    fallback_reason = None
    if config:
        try:
            logging_config = config.get_logging_config()
        except Exception as e:
            fallback_reason = e

    rich_handler = RichHandler(
        rich_tracebacks=True,
        console=console,
        show_time=True,
        show_path=False,
    )

    setup_qkz_logging(
        verbose=verbose,
        config=logging_config,
        console_handler=rich_handler,
    )
    if fallback_reason is not None:
        logger.warning(f"Invalid logging settings, using defaults: {fallback_reason}")


def _int_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _levels(ctx, param, value: Optional[str]) -> Optional[List[List[int]]]:
    """'3,1,0' is one level list; ';' separates several."""
    if value is None:
        return None
    try:
        return [[int(v) for v in group.split(",")] for group in value.split(";") if group.strip()]
    except ValueError:
        raise click.BadParameter(f"expected sizes like 3,1,0 or 3,1,0;4,2,1, got {value!r}")


def suite_options(f):
    """Flags shared by `verify` and `suite`; every flag overrides the config file."""
    options = [
        click.option('--q', 'q', type=float, help='Deformation parameter q'),
        click.option('--kappa', type=float, help='Shift parameter kappa'),
        click.option('--sites', callback=_int_list, help='Chain lengths N, e.g. 2,3'),
        click.option('--particles', callback=_int_list, help='Particle numbers m, e.g. 0,1'),
        click.option('--rank', type=int, help='Rank n of U_q[sl(n)] (2..4)'),
        click.option('--levels', callback=_levels, help='Nested level sizes, e.g. 3,1,0'),
        click.option('--seed', type=int, help='Suite seed'),
        click.option('--sum-tol', 'sum_tol', type=float, help='Lattice-sum shell tolerance'),
        click.option('--max-shell', 'max_shell', type=int, help='Maximum lattice shell radius'),
        click.option('--draws', type=int, help='Random draws per case'),
        click.option('--out', type=click.Path(), help='JSON-lines report path'),
        click.option('--jobs', type=int, help='Worker count (0 = all cores)'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _run(ctx, cfg: SuiteConfig, overrides: dict):
    from .checks import run_suite
    from .checks.report import summary_table

    try:
        cfg = cfg.with_overrides(**overrides)
        result = run_suite(cfg)
    except ConfigError as e:
        console.print(f"[red]✗ Configuration error:[/red] {escape(str(e))}")
        ctx.exit(2)

    console.print(summary_table(result.reports))
    for report in result.failures:
        if report.error:
            console.print(f"[red]✗[/red] {report.check}: {escape(report.error)}")
    passed = len(result.reports) - len(result.failures)
    colour = "green" if result.passed else "red"
    console.print(
        f"[{colour}]{passed}/{len(result.reports)} passed[/{colour}] "
        f"in {result.wall_time:.2f}s, report written to {result.output}"
    )
    ctx.exit(result.exit_code)


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.option('--config', type=click.Path(), help='Path to a suite config file')
@click.pass_context
def main(ctx, verbose, config):
    """
    qkz - numerical checks for Bethe-ansatz solutions of the qKZ equations.

    Exit codes: 0 when every check passes, 1 when any fails, 2 on configuration errors.
    """
    try:
        cfg = SuiteConfig.load(Path(config) if config else None)
    except ConfigError as e:
        console.print(f"[red]✗ Configuration error:[/red] {escape(str(e))}")
        ctx.exit(2)

    setup_logging(verbose, cfg)

    ctx.ensure_object(dict)
    ctx.obj['config'] = cfg
    ctx.obj['verbose'] = verbose


@main.command()
@click.argument('check')
@suite_options
@click.pass_context
def verify(ctx, check, **flags):
    """
    Run a single check.

    Examples:
        qkz verify ybe --rank 3
        qkz verify bethe --sites 2 --particles 1 --out bethe.jsonl
    """
    _run(ctx, ctx.obj['config'], dict(flags, checks=[check]))


@main.command()
@click.option('--config', 'suite_config', type=click.Path(), help='Path to a suite config file')
@suite_options
@click.pass_context
def suite(ctx, suite_config, **flags):
    """
    Run the checks listed in a config file.

    Examples:
        qkz suite --config suite.toml
        qkz suite --config suite.toml --jobs 4 --seed 7
    """
    cfg = ctx.obj['config']
    if suite_config:
        try:
            cfg = SuiteConfig.load(Path(suite_config))
        except ConfigError as e:
            console.print(f"[red]✗ Configuration error:[/red] {escape(str(e))}")
            ctx.exit(2)
    _run(ctx, cfg, flags)


@main.command(name='checks')
@click.pass_context
def list_checks(ctx):
    """List the available checks."""
    from .checks import CHECKS

    cfg = ctx.obj['config']
    table = Table(title="Available checks")
    table.add_column("Name", style="cyan")
    table.add_column("Description")
    table.add_column("Tolerance", justify="right")
    table.add_column("Default", justify="center")

    for name, cls in CHECKS.items():
        check = cls(cfg)
        table.add_row(
            name,
            check.description,
            f"{check.tolerance:.0e}",
            "✓" if name in cfg.checks else "",
        )
    console.print(table)


@main.command()
def schema():
    """Print the path of the report JSON schema."""
    from .checks.report import schema_path

    click.echo(str(schema_path()))


@main.command(name='config-show')
@click.pass_context
def config_show(ctx):
    """Show the effective configuration as TOML."""
    config = ctx.obj['config']
    console.print(Panel(
        Text(toml.dumps(config.to_dict())),
        title="Configuration",
        border_style="cyan"
    ))


@main.command()
def version():
    """Show version information."""
    from . import __version__
    console.print(f"qkz v{__version__}")


if __name__ == '__main__':
    main()
