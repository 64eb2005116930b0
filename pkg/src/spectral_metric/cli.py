"""
Command-line front end.

Every command reads TripleSpec / StateSpec JSON files and prints JSON (or
CSV) on stdout. Exit codes: 0 ok, 2 unusable input, 3 solver diagnostic.
"""

import csv
import io
import json
import math
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from pathlib import Path
from typing import Optional

import click
import numpy as np
from loguru import logger
from pydantic import ValidationError

from spectral_metric.errors import ArgumentError, ConvergenceError
from spectral_metric.schema import ElementSpec, StateSpec, TripleSpec, encode_matrix, states_from_file
from spectral_metric.settings import TOL, SolverOptions, ToolkitConfig
from spectral_metric.solver import SolverResult, connes_distance
from spectral_metric.triple import lipschitz_seminorm, seminorm_kernel
from spectral_metric.verify import SuiteRegistry, reports_to_file, reports_to_json, run_suites

EXIT_INPUT = 2
EXIT_SOLVER = 3

FilePath = click.Path(exists=True, dir_okay=False, path_type=Path)


def fmt(value: Optional[float]):
    """Nine significant digits; infinity prints as the string "inf"."""
    if value is None:
        return None
    if math.isinf(value):
        return "inf"
    return float(f"{value:.9g}")


def _handle_errors(command):
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConvergenceError as e:
            logger.error(f"solver diagnostic: {e}")
            click.echo(f"error: {e}", err=True)
            if e.bracket is not None:
                click.echo(f"bracket: [{e.bracket[0]:.9g}, {e.bracket[1]:.9g}]", err=True)
            sys.exit(EXIT_SOLVER)
        except (ArgumentError, ValidationError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def solver_flags(command):
    for decorator in reversed(
        [
            click.option("--tol", type=float, default=None, help="target absolute accuracy of the distance"),
            click.option("--seed", type=int, default=None, help="seed of the restart generator"),
            click.option("--restarts", type=int, default=None, help="random starts of the inner ascent"),
            click.option("--force-bisection", is_flag=True, help="skip the closed form (cross-checks)"),
        ]
    ):
        command = decorator(command)
    return command


def _options(ctx: click.Context, tol, seed, restarts, force_bisection) -> SolverOptions:
    config: ToolkitConfig = ctx.obj
    return config.merged(tol=tol, seed=seed, restarts=restarts, force_bisection=force_bisection or None)


def _emit(record: dict, fmt_: str) -> None:
    if fmt_ == "json":
        click.echo(json.dumps(record))
        return
    flat = {k: v for k, v in record.items() if not isinstance(v, list)}
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(flat), lineterminator="\n")
    writer.writeheader()
    writer.writerow(flat)
    click.echo(out.getvalue(), nl=False)


def result_record(result: SolverResult) -> dict:
    record = {
        "distance": fmt(result.distance),
        "finite": result.finite,
        "method": result.method.value,
        "seminorm_certificate": fmt(result.seminorm_certificate),
        "objective_certificate": fmt(result.objective_certificate),
    }
    if result.optimal_element is not None:
        record["optimal_element"] = encode_matrix(result.optimal_element)
    return record


@click.group()
@click.option("--config", type=FilePath, default=None, help="TOML file with [solver] and [verify] tables")
@click.pass_context
def main(ctx: click.Context, config: Optional[Path]):
    """Connes spectral distances on finite spectral triples."""
    try:
        ctx.obj = ToolkitConfig.from_toml(config) if config else ToolkitConfig()
    except (ValidationError, tomllib.TOMLDecodeError) as e:
        click.echo(f"error: invalid config {config}: {e}", err=True)
        sys.exit(EXIT_INPUT)


@main.command()
@click.argument("triple_file", type=FilePath)
@click.argument("state_file_1", type=FilePath)
@click.argument("state_file_2", type=FilePath)
@solver_flags
@click.option("--format", "fmt_", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
@_handle_errors
def distance(ctx, triple_file, state_file_1, state_file_2, tol, seed, restarts, force_bisection, fmt_):
    """Distance between the states of two StateSpec files."""
    opts = _options(ctx, tol, seed, restarts, force_bisection)
    t = TripleSpec.from_file(triple_file).to_triple()
    rho1 = StateSpec.from_file(state_file_1).to_density()
    rho2 = StateSpec.from_file(state_file_2).to_density()
    _emit(result_record(connes_distance(t, rho1, rho2, opts)), fmt_)


@main.command()
@click.argument("triple_file", type=FilePath)
@click.argument("element_file", type=FilePath)
@click.option("--format", "fmt_", type=click.Choice(["json", "csv"]), default="json")
@_handle_errors
def seminorm(triple_file, element_file, fmt_):
    """Lipschitz seminorm ||[D, pi(e)]||_op of one element."""
    t = TripleSpec.from_file(triple_file).to_triple()
    e = ElementSpec.from_file(element_file).to_matrix()
    value = lipschitz_seminorm(t, e)
    record = {
        "seminorm": fmt(value),
        "in_ball": bool(value <= 1.0 + TOL.isometry),
        "kernel_dim": len(seminorm_kernel(t)),
    }
    _emit(record, fmt_)


@main.command()
@click.argument("names", nargs=-1)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--tol", type=float, default=None, help="solver tolerance for solver-mediated suites")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
@_handle_errors
def verify(ctx, names, trials, seed, tol, workers, output):
    """Run named suites, or "all"; exits 0 iff every suite passes."""
    config: ToolkitConfig = ctx.obj
    registry = SuiteRegistry()
    if not names or "all" in names:
        names = registry.available_suites
    for name in names:
        registry.get(name)
    reports = run_suites(
        names,
        trials=trials or config.verify.trials,
        seed=config.verify.seed if seed is None else seed,
        opts=config.merged(tol=tol),
        workers=workers,
    )
    if output is None:
        click.echo(reports_to_json(reports))
    else:
        reports_to_file(reports, output)
        for report in reports:
            click.echo(str(report))
    sys.exit(0 if all(r.passed for r in reports) else 1)


@main.command()
@click.argument("triple_file", type=FilePath)
@click.argument("states_file", type=FilePath)
@solver_flags
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--workers", type=int, default=1, show_default=True)
@click.pass_context
@_handle_errors
def table(ctx, triple_file, states_file, tol, seed, restarts, force_bisection, fmt_, workers):
    """Pairwise distance matrix of a list of StateSpecs, as CSV."""
    opts = _options(ctx, tol, seed, restarts, force_bisection)
    t = TripleSpec.from_file(triple_file).to_triple()
    specs = states_from_file(states_file)
    states = [s.to_density() for s in specs]
    pairs = [(i, j) for i in range(len(states)) for j in range(i + 1, len(states))]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        values = list(pool.map(lambda ij: connes_distance(t, states[ij[0]], states[ij[1]], opts).distance, pairs))

    matrix = np.zeros((len(states), len(states)))
    for (i, j), value in zip(pairs, values):
        matrix[i, j] = matrix[j, i] = value
    labels = [s.display_label(k) for k, s in enumerate(specs)]

    if fmt_ == "json":
        click.echo(json.dumps({"labels": labels, "distances": [[fmt(v) for v in row] for row in matrix]}))
        return
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(labels)
    for row in matrix:
        writer.writerow([fmt(v) if v else 0 for v in row])
    click.echo(out.getvalue(), nl=False)


@main.command()
def suites():
    """List the registered suites."""
    registry = SuiteRegistry()
    for name in registry.available_suites:
        click.echo(f"{name:20s} {registry.get(name).statement}")
