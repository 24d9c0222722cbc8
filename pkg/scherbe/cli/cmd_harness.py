# SPDX-FileCopyrightText: 2025 Deutsche Telekom AG (opensource@telekom.de)
#
# SPDX-License-Identifier: Apache-2.0

"""CLI commands of the experiment harness."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Annotated

import typer
from rich.console import Console
from rich.table import Table

if TYPE_CHECKING:
    from scherbe.harness import ExperimentSettings, MetricsReport, WorkloadSpec

app = typer.Typer(
    no_args_is_help=True,
    help="Replay synthetic workloads and sweep coding parameters.",
)
console = Console()
WORKLOAD_HELP = "Workload JSON, generated from the config when omitted."


def _load(config: Path | None, workload: Path | None) -> tuple[ExperimentSettings, WorkloadSpec]:
    from scherbe.core.settings import load_settings  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    # pylint: disable-next=import-outside-toplevel
    from scherbe.harness import ExperimentSettings, WorkloadSpec, generate_workload  # noqa: PLC0415

    settings = load_settings(ExperimentSettings, config)
    spec = WorkloadSpec.load(workload) if workload is not None else generate_workload(settings.WORKLOAD.spec())
    return settings, spec


def _print_report(report: MetricsReport) -> None:
    rows = report.to_row()
    if report.consistency is not None:
        rows["consistent"] = report.consistency.ok
    if console.is_terminal:
        table = Table(title="Experiment", header_style="bold magenta")
        table.add_column("METRIC", style="cyan")
        table.add_column("VALUE", justify="right")
        for key, value in rows.items():
            table.add_row(key, f"{value:.4f}" if isinstance(value, float) else str(value))
        console.print(table)
        return
    typer.echo("\n".join(f"{key}={value}" for key, value in rows.items()))


@app.command("run")
def run(
    config: Annotated[Path | None, typer.Option("--config", "-c", help="KEY=value file with ExperimentSettings keys.")] = None,
    workload: Annotated[Path | None, typer.Option("--workload", "-w", help=WORKLOAD_HELP)] = None,
    out: Annotated[Path, typer.Option("--out", "-o", help="Directory for summary.csv, hourly.csv and daily.csv.")] = Path("results"),
) -> None:
    """Replay one workload and write the metrics."""
    from scherbe.cli import exit_code  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.exceptions import ScherbeError  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.harness import run_experiment, write_report  # noqa: PLC0415  # pylint: disable=import-outside-toplevel

    try:
        settings, spec = _load(config, workload)
        report = run_experiment(settings, spec)
    except ScherbeError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(exit_code(exc)) from exc
    paths = write_report(report, out)
    _print_report(report)
    typer.echo(f"Wrote {', '.join(str(path) for path in paths)}")


def _parse_k(value: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as exc:
        raise typer.BadParameter(f"'{value}' is not a comma separated list of integers") from exc


@app.command("sweep-k")
def sweep(
    k: Annotated[str, typer.Option("--k", help="Comma separated k values, e.g. 2,5,8,10.")] = "2,5,8,10",
    config: Annotated[Path | None, typer.Option("--config", "-c", help="KEY=value file with ExperimentSettings keys.")] = None,
    workload: Annotated[Path | None, typer.Option("--workload", "-w", help=WORKLOAD_HELP)] = None,
    out: Annotated[Path, typer.Option("--out", "-o", help="CSV file of the sweep.")] = Path("results/sweep_k.csv"),
) -> None:
    """Run the same workload for every k at fixed n."""
    from scherbe.cli import exit_code  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.exceptions import ScherbeError  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.harness import sweep_k  # noqa: PLC0415  # pylint: disable=import-outside-toplevel

    try:
        settings, spec = _load(config, workload)
        table = sweep_k(settings, _parse_k(k), spec, out)
    except ScherbeError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(exit_code(exc)) from exc
    typer.echo(table[["k", "dedup_ratio", "avg_retrieval_ms"]].to_string(index=False))
    typer.echo(f"Wrote {out}")


@app.command("gen-workload")
def gen_workload(
    out: Annotated[Path, typer.Option("--out", "-o", help="Target JSON file.")],
    seed: Annotated[int | None, typer.Option("--seed", help="Overrides WORKLOAD__SEED.")] = None,
    config: Annotated[Path | None, typer.Option("--config", "-c", help="KEY=value file with ExperimentSettings keys.")] = None,
) -> None:
    """Generate a workload (file recipes and request trace) and store it as JSON."""
    from scherbe.core.settings import load_settings  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.exceptions import ScherbeError  # noqa: PLC0415  # pylint: disable=import-outside-toplevel
    from scherbe.harness import ExperimentSettings, generate_workload  # noqa: PLC0415  # pylint: disable=import-outside-toplevel

    try:
        settings = load_settings(ExperimentSettings, config)
    except ScherbeError as exc:
        typer.echo(f"Error: {exc}", err=True)
        raise typer.Exit(3) from exc
    spec = settings.WORKLOAD.spec()
    if seed is not None:
        spec = spec.model_copy(update={"seed": seed})
    spec = generate_workload(spec)
    out.parent.mkdir(parents=True, exist_ok=True)
    spec.save(out)
    typer.echo(f"Wrote {out}: {len(spec.files)} files, {len(spec.trace)} events")
