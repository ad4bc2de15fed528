"""CLI interface for lade-lab using Click and Rich.

Commands:
- gen-data: Sample training and shifted test sets
- train: Train the MLP and write checkpoint + history
- evaluate: Score every inference rule on every test set
- calibrate: Write calibration scalars and diagnostic tables
- sweep: Train/evaluate along a hyperparameter axis (resumable)
- status: Show the stage of an experiment directory

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O.
"""

import logging
import sys
from collections.abc import Callable
from functools import wraps
from pathlib import Path
from typing import Any, NoReturn

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from lade_lab import __version__
from lade_lab.errors import LadeLabError
from lade_lab.experiment import ExperimentLayout, ExperimentManager, load_config, select_by_validation
from lade_lab.schemas import SweepAxis

console = Console()
logger = logging.getLogger(__name__)


def setup_logging(verbose: bool) -> None:
    """Route the package logger through a single RichHandler."""
    package_logger = logging.getLogger("lade_lab")
    package_logger.handlers.clear()
    package_logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    package_logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    package_logger.propagate = False


def error(message: str, exit_code: int = 1) -> NoReturn:
    """Display error message and exit."""
    console.print(f"[bold red]Error:[/bold red] {message}\n", style="red")
    sys.exit(exit_code)


def get_manager(
    config_path: str | None, out: str | None, seed: int | None, overrides: tuple[str, ...]
) -> ExperimentManager:
    """Build the manager for the requested experiment.

    Without --config, an existing <out>/config.toml is reused so that later
    commands see the settings gen-data wrote.
    """
    path = Path(config_path) if config_path else None
    if path is None and out is not None:
        existing = ExperimentLayout(Path(out)).config_file
        if existing.exists():
            path = existing
    config = load_config(path, overrides=overrides, seed=seed, out=out)
    return ExperimentManager(config)


def experiment_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Shared --config/--out/--seed/--set options; hands a manager to the command."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Flat dotted-key TOML config")
    @click.option("--out", type=click.Path(file_okay=False), help="Experiment directory (overrides run.out)")
    @click.option("--seed", type=int, help="Run seed (overrides run.seed)")
    @click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override one config key")
    @wraps(command)
    def wrapper(
        config_path: str | None,
        out: str | None,
        seed: int | None,
        overrides: tuple[str, ...],
        **kwargs: Any,
    ) -> None:
        try:
            manager = get_manager(config_path, out, seed, overrides)
            command(manager, **kwargs)
        except LadeLabError as e:
            error(str(e), e.exit_code)

    return wrapper


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


@click.group()
@click.version_option(version=__version__, prog_name="lade-lab")
@click.option("--verbose", "-v", is_flag=True, help="Log per-step details")
def cli(verbose: bool) -> None:
    """lade-lab - label-shift classification laboratory.

    Long-tailed synthetic data, LADE training and post-compensated inference,
    checked against exact Bayes posteriors.
    """
    setup_logging(verbose)


@cli.command("gen-data")
@experiment_options
def gen_data(manager: ExperimentManager) -> None:
    """Sample the training set and every shifted test set."""
    written = manager.gen_data()
    console.print(
        Panel.fit(
            f"[bold cyan]Data generated[/bold cyan]\n"
            f"Directory: [dim]{manager.layout.root}[/dim]\n"
            f"Files: {len(written)}\n"
            f"Config hash: [dim]{manager.digest}[/dim]",
            border_style="cyan",
        )
    )


@cli.command()
@experiment_options
def train(manager: ExperimentManager) -> None:
    """Train the classifier with the configured loss."""
    _, history = manager.train()
    last = history[-1]
    console.print(
        Panel.fit(
            f"[bold green]Training complete[/bold green] ({manager.config.loss.kind.value})\n"
            f"Epochs: {last.epoch}\n"
            f"Final mean loss: {last.mean_loss:.5f}\n"
            f"Training accuracy: {last.train_accuracy:.4f}\n"
            f"Checkpoint: [dim]{manager.layout.checkpoint}[/dim]",
            border_style="green",
        )
    )


@cli.command()
@experiment_options
def evaluate(manager: ExperimentManager) -> None:
    """Evaluate all inference rules across the shift grid."""
    record = manager.evaluate()

    table = Table(title="Top-1 accuracy", border_style="blue")
    table.add_column("Method", style="cyan")
    table.add_column("Shift", style="magenta")
    for column in ("Top-1", "Many", "Medium", "Few", "Oracle TV"):
        table.add_column(column, style="yellow", justify="right")
    for row in record.rows:
        shift = row.shift_direction if row.shift_direction == "uniform" else f"{row.shift_direction}-{row.shift_mu:g}"
        table.add_row(row.method, shift, _fmt(row.top1), _fmt(row.many), _fmt(row.medium), _fmt(row.few), _fmt(row.oracle_tv))

    console.print(table)
    console.print(f"\n[dim]Record written to {manager.layout.record}[/dim]\n")


@cli.command()
@experiment_options
def calibrate(manager: ExperimentManager) -> None:
    """Write calibration scalars, reliability bins and logit statistics."""
    scalars = manager.calibrate()

    table = Table(title="Calibration (balanced test set)", border_style="blue")
    table.add_column("Method", style="cyan")
    for column in ("Accuracy", "ECE", "Classwise ECE", "Brier", "NLL"):
        table.add_column(column, style="yellow", justify="right")
    for s in scalars:
        table.add_row(s.method, _fmt(s.accuracy), _fmt(s.ece), _fmt(s.classwise_ece), _fmt(s.brier), _fmt(s.nll))

    console.print(table)
    console.print(f"\n[dim]Tables written to {manager.layout.calibration_dir}[/dim]\n")


@cli.command()
@click.option(
    "--axis",
    type=click.Choice([a.value for a in SweepAxis]),
    required=True,
    help="Hyperparameter axis to sweep",
)
@experiment_options
def sweep(manager: ExperimentManager, axis: str) -> None:
    """Train and evaluate each point along one axis."""
    rows = manager.sweep(SweepAxis(axis))

    table = Table(title=f"Sweep over {axis}", border_style="blue")
    table.add_column("Value", style="cyan")
    table.add_column("Config", style="dim")
    for column in ("Final loss", "Val top-1", "Top-1", "Many", "Medium", "Few"):
        table.add_column(column, style="yellow", justify="right")
    for row in rows:
        table.add_row(
            row.value, row.config_hash, _fmt(row.final_loss), _fmt(row.val_top1),
            _fmt(row.top1), _fmt(row.many), _fmt(row.medium), _fmt(row.few),
        )

    console.print(table)
    if any(row.val_top1 is not None for row in rows):
        best = select_by_validation(rows)
        console.print(f"\n[bold green]Selected by validation:[/bold green] {axis} = {best.value}")
    console.print(f"\n[dim]Sweep table written to {manager.layout.sweep_table(axis)}[/dim]\n")


@cli.command()
@experiment_options
def status(manager: ExperimentManager) -> None:
    """Show the stage of an experiment directory."""
    table = Table(title="Experiment Status", border_style="blue", show_header=False)
    table.add_column("Key", style="cyan")
    table.add_column("Value", style="yellow")

    table.add_row("Directory", str(manager.layout.root))
    table.add_row("Config hash", manager.digest)
    table.add_row("Stage", manager.stages.current_stage.value)
    table.add_row("Loss", manager.config.loss.kind.value)
    table.add_row("Recorded results", str(len(manager.store)))

    console.print(table)
    console.print()


if __name__ == "__main__":
    cli()
