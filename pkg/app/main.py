#!/usr/bin/env python3
"""
CLI for the G_k enumeration engine using Typer.
Provides the commands:
  - series: Dump tree or block series as exact JSON.
  - census: Brute-force class counts for n <= 8.
  - constants: eta_k, c_k and the related constants.
  - asymptotics: Exact upper-bound coefficients against their transfer estimate.
  - certify: Subcriticality certificate for G_k.
  - grammar: Block grammar counts against the census.
  - sandwich: Upper and lower bounds for the 2-connected k-apex forests against the census.
  - report: Markdown bundle with all of the above for one k.
"""

from collections.abc import Callable
from pathlib import Path
from typing import Any

import typer
from loguru import logger

from app.analytic.certificate import certify_class
from app.analytic.transfer import asymptotic_table
from app.combinatorics.blocks import lower_correction_series, lower_series, sandwich_table, upper_series
from app.combinatorics.composition import gk_class_counts
from app.combinatorics.trees import build_tree_bundle
from app.oracle.census import CENSUS_FIELDS, census_table
from app.report_components.data_processor import (
    ASYMPTOTIC_FIELDS,
    GRAMMAR_FIELDS,
    SANDWICH_FIELDS,
    asymptotic_table_rows,
    census_table_rows,
    certificate_record,
    constants_record,
    grammar_table_rows,
    render_table,
    sandwich_table_rows,
    to_json,
)
from app.report_components.report_generator import ReportSettings, build_report_tables, write_report_bundle
from app.utils.errors import SubcriticalError
from app.utils.performance_utils import RunMonitor
from app.utils.run_config import RunConfig, output_dir

app = typer.Typer(help="Exact series, brute-force census and subcriticality certificates for G_k.")

SERIES_NAMES = ("T", "t", "f", "T_biv", "t_biv", "f_biv", "Uk", "Lk", "Lcorr")

# Define the option objects
K_OPTION = typer.Option(None, "--k", help="Number of apex vertices.")
N_MAX_OPTION = typer.Option(None, "--n-max", help="Largest number of vertices for oracle tables.")
TRUNC_OPTION = typer.Option(None, "--trunc", help="Truncation order of the series.")
TOL_OPTION = typer.Option(None, "--tol", help="Root tolerance.")
JOBS_OPTION = typer.Option(None, "--jobs", help="Census threads (compiled engine) or worker processes (python engine).")
FORMAT_OPTION = typer.Option(None, "--format", help="Table format: csv or json.")
OUT_OPTION = typer.Option(
    None, "--out", help="Output file (relative to $SUBCRITICAL_GK_OUTPUT_DIR); stdout if omitted."
)
ORACLE_N_OPTION = typer.Option(None, "--oracle-n", help="Block counts are exact up to this n in the certificate.")
TAIL_OPTION = typer.Option(None, "--tail", help="Tail constant of the block series: lemma or fitted.")
ENGINE_OPTION = typer.Option("compiled", "--engine", help="Census engine: compiled (numba) or python (reference).")
NAME_OPTION = typer.Option(..., "--name", help=f"Series to dump: one of {', '.join(SERIES_NAMES)}.")


@app.callback()
def main(
    ctx: typer.Context,
    config: str = typer.Option(None, "--config", help="Path to configuration YAML file."),
    verbose: bool = typer.Option(False, "--verbose", help="Log debug messages to stderr."),
):
    """Global options shared by every command."""
    ctx.obj = {"config": config, "verbose": verbose}


def _configure(ctx: typer.Context, command: str, **flags: Any) -> tuple[RunConfig, RunMonitor]:
    options = ctx.obj or {}
    monitor = RunMonitor(output_dir(), verbose=options.get("verbose", False))
    config = RunConfig.build(command, options.get("config"), **flags)
    logger.debug("Running {} with {}", command, config)
    return config, monitor


def _require_positive_k(config: RunConfig) -> None:
    if config.k < 1:
        raise typer.BadParameter(f"{config.command} needs k >= 1, got {config.k}")


def _emit(config: RunConfig, content: str) -> None:
    target = config.resolve_output()
    if target is None:
        typer.echo(content, nl=False)
        return
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(content)
    logger.info("Output written to {}", target)


def _guarded(action: Callable[[], None]) -> None:
    """Library failures exit with code 1; usage errors keep Typer's code 2."""
    try:
        action()
    except (typer.BadParameter, typer.Exit):
        raise
    except SubcriticalError as e:
        logger.error("{}: {}", type(e).__name__, e)
        raise typer.Exit(code=1) from e
    except Exception as e:
        logger.exception("Unexpected error: {}", e)
        raise typer.Exit(code=1) from e


@app.command()
def series(
    ctx: typer.Context,
    name: str = NAME_OPTION,
    k: int = K_OPTION,
    trunc: int = TRUNC_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Dump one tree or block series in the exact JSON series format.

    T, t, f and their bivariate versions come from the cross-checked tree bundle;
    Uk, Lk and Lcorr are the upper bound, lower bound and lower-bound correction for k.
    """
    config, _ = _configure(ctx, "series", k=k, trunc_order=trunc, output_path=out)
    if name not in SERIES_NAMES:
        raise typer.BadParameter(f"unknown series {name!r}; choose from {', '.join(SERIES_NAMES)}")

    def action():
        order = config.trunc_order
        if name in ("Uk", "Lk", "Lcorr"):
            _require_positive_k(config)
            builder = {"Uk": upper_series, "Lk": lower_series, "Lcorr": lower_correction_series}[name]
            data = builder(config.k, order).to_dict()
        else:
            bundle = build_tree_bundle(order)
            data = getattr(bundle, name).to_dict()
        _emit(config, to_json({"name": name, **data}))

    _guarded(action)


@app.command()
def census(
    ctx: typer.Context,
    k: int = K_OPTION,
    n_max: int = N_MAX_OPTION,
    jobs: int = JOBS_OPTION,
    output_format: str = FORMAT_OPTION,
    out: Path = OUT_OPTION,
    engine: str = ENGINE_OPTION,
):
    """
    Count A_k, Z_k, B_k, connected G_k and G_k on n = 1 .. n_max labelled vertices by exhaustive enumeration.
    """
    config, monitor = _configure(
        ctx, "census", k=k, n_max=n_max, parallelism=jobs, output_format=output_format, output_path=out
    )
    if config.n_max > 8:
        raise typer.BadParameter(f"census is limited to n <= 8, got {config.n_max}")

    def action():
        rows, elapsed, peak, _ = monitor.measure_performance(
            lambda: census_table(config.n_max, [config.k], config.parallelism, engine)
        )
        logger.info("Census finished in {:.2f}s, peak extra memory {:.1f} MB", elapsed, peak / (1024 * 1024))
        _emit(config, render_table(CENSUS_FIELDS, census_table_rows(rows), config.output_format))

    _guarded(action)


@app.command()
def constants(
    ctx: typer.Context,
    k: int = K_OPTION,
    output_format: str = FORMAT_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Print eta_k, the upper-bound constant c_k, Gamma(-3/2), the apex-forest growth constants and the planar check.
    """
    config, _ = _configure(ctx, "constants", k=k, output_format=output_format, output_path=out)
    _require_positive_k(config)

    def action():
        record = constants_record(config.k)
        _emit(config, render_table(tuple(record), [tuple(record.values())], config.output_format))

    _guarded(action)


@app.command()
def asymptotics(
    ctx: typer.Context,
    k: int = K_OPTION,
    trunc: int = TRUNC_OPTION,
    output_format: str = FORMAT_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Compare the exact coefficients of U_k with (c_k / Gamma(-3/2)) n^(-5/2) eta_k^(-n).
    """
    config, _ = _configure(ctx, "asymptotics", k=k, trunc_order=trunc, output_format=output_format, output_path=out)
    _require_positive_k(config)

    def action():
        rows = asymptotic_table(config.k, config.trunc_order)
        _emit(config, render_table(ASYMPTOTIC_FIELDS, asymptotic_table_rows(rows), config.output_format))

    _guarded(action)


@app.command()
def certify(
    ctx: typer.Context,
    k: int = K_OPTION,
    trunc: int = TRUNC_OPTION,
    tol: float = TOL_OPTION,
    oracle_n: int = ORACLE_N_OPTION,
    tail: str = TAIL_OPTION,
    jobs: int = JOBS_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Solve t B''(t) = 1 for the hybrid block series of G_k and write the certificate as JSON.

    An invalid certificate is a result: the command still exits with code 0.
    """
    config, _ = _configure(
        ctx,
        "certify",
        k=k,
        trunc_order=trunc,
        tolerance=tol,
        oracle_n=oracle_n,
        tail_constant=tail,
        parallelism=jobs,
        output_path=out,
    )
    _require_positive_k(config)

    def action():
        certificate = certify_class(
            config.k,
            config.trunc_order,
            oracle_n=config.oracle_n,
            tail=config.tail_constant,
            tol=config.tolerance,
            jobs=config.parallelism,
        )
        _emit(config, to_json(certificate_record(certificate)))

    _guarded(action)


@app.command()
def grammar(
    ctx: typer.Context,
    k: int = K_OPTION,
    n_max: int = N_MAX_OPTION,
    jobs: int = JOBS_OPTION,
    output_format: str = FORMAT_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Run the block grammar on the census block counts and compare with the census of G_k.
    """
    config, _ = _configure(
        ctx, "grammar", k=k, n_max=n_max, parallelism=jobs, output_format=output_format, output_path=out
    )
    if config.n_max > 8:
        raise typer.BadParameter(f"grammar check is limited to n <= 8, got {config.n_max}")

    def action():
        rows = gk_class_counts(config.k, config.n_max, jobs=config.parallelism)
        _emit(config, render_table(GRAMMAR_FIELDS, grammar_table_rows(rows), config.output_format))

    _guarded(action)


@app.command()
def sandwich(
    ctx: typer.Context,
    k: int = K_OPTION,
    n_max: int = N_MAX_OPTION,
    jobs: int = JOBS_OPTION,
    output_format: str = FORMAT_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Lower bound, census count and upper bound of the 2-connected k-apex forests for n = 1 .. n_max.
    """
    config, _ = _configure(
        ctx, "sandwich", k=k, n_max=n_max, parallelism=jobs, output_format=output_format, output_path=out
    )
    _require_positive_k(config)

    def action():
        oracle_top = min(config.n_max, 8)
        rows = census_table(oracle_top, [config.k], config.parallelism)
        table = sandwich_table(config.k, config.n_max, {row.n: row.count_A for row in rows})
        _emit(config, render_table(SANDWICH_FIELDS, sandwich_table_rows(table), config.output_format))

    _guarded(action)


@app.command()
def report(
    ctx: typer.Context,
    k: int = K_OPTION,
    n_max: int = N_MAX_OPTION,
    trunc: int = TRUNC_OPTION,
    tol: float = TOL_OPTION,
    oracle_n: int = ORACLE_N_OPTION,
    tail: str = TAIL_OPTION,
    jobs: int = JOBS_OPTION,
    out: Path = OUT_OPTION,
):
    """
    Write the Markdown report for one k with census, sandwich, asymptotics, grammar and certificate files.

    The bundle goes to --out (a directory) or to report_k<K> in the output directory.
    """
    config, monitor = _configure(
        ctx,
        "report",
        k=k,
        n_max=n_max,
        trunc_order=trunc,
        tolerance=tol,
        oracle_n=oracle_n,
        tail_constant=tail,
        parallelism=jobs,
        output_path=out,
    )
    _require_positive_k(config)
    if config.n_max > 8:
        raise typer.BadParameter(f"report census is limited to n <= 8, got {config.n_max}")

    def action():
        bundle_dir = config.resolve_output() or output_dir() / f"report_k{config.k}"
        settings = ReportSettings(
            k=config.k,
            n_max=config.n_max,
            trunc_order=config.trunc_order,
            tolerance=config.tolerance,
            oracle_n=config.oracle_n,
            tail_constant=config.tail_constant,
            jobs=config.parallelism,
        )
        tables, elapsed, peak, _ = monitor.measure_performance(lambda: build_report_tables(settings))
        settings.resources = {"elapsed_seconds": elapsed, "peak_extra_memory_bytes": peak}
        report_file = write_report_bundle(settings, bundle_dir, tables)
        logger.info("Report bundle {} written, tables took {:.2f}s", report_file, elapsed)
        typer.echo(str(report_file))

    _guarded(action)


if __name__ == "__main__":
    app()
