import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jinja2
from loguru import logger

from app.analytic.certificate import SubcriticalityCertificate, certify_class
from app.analytic.transfer import AsymptoticRow, asymptotic_table
from app.combinatorics.blocks import SandwichRow, sandwich_table
from app.combinatorics.composition import GrammarCheckRow, gk_class_counts
from app.oracle.census import CENSUS_FIELDS, CensusRow, census_rows
from app.report_components.data_processor import (
    ASYMPTOTIC_FIELDS,
    GRAMMAR_FIELDS,
    SANDWICH_FIELDS,
    asymptotic_table_rows,
    census_table_rows,
    certificate_record,
    constants_record,
    format_value,
    grammar_table_rows,
    sandwich_table_rows,
    to_csv,
    to_json,
)


@dataclass
class ReportSettings:
    k: int
    n_max: int = 6
    trunc_order: int = 50
    tolerance: float = 1e-10
    oracle_n: int = 6
    tail_constant: str = "lemma"
    jobs: int = 1
    resources: dict[str, Any] = field(default_factory=dict)


def render_markdown_report(context: dict[str, Any]) -> str:
    """
    Render the Markdown summary from ``template/report_template.md.j2``.

    Args:
        context: Values referenced by the template (k, constants, certificate, tables, resources).
    """
    template_dir = os.path.join(os.path.dirname(__file__), "template")
    env = jinja2.Environment(
        loader=jinja2.FileSystemLoader(template_dir),
        keep_trailing_newline=True,
        undefined=jinja2.StrictUndefined,
    )
    env.filters["fmt"] = format_value
    template = env.get_template("report_template.md.j2")
    return template.render(context)


@dataclass
class ReportTables:
    census: dict[int, CensusRow]
    census_shown: list[CensusRow]
    sandwich: list[SandwichRow]
    asymptotics: list[AsymptoticRow]
    grammar: list[GrammarCheckRow]
    certificate: SubcriticalityCertificate


def build_report_tables(settings: ReportSettings) -> ReportTables:
    """Run the census, bounds, transfer comparison, grammar check and certificate for ``settings.k``."""
    k = settings.k
    n_max = min(settings.n_max, 8)

    census = {n: census_rows(n, [k], settings.jobs)[0] for n in range(1, max(n_max, settings.oracle_n) + 1)}
    logger.info("Census for k={} computed up to n={}", k, max(census))

    certificate = certify_class(
        k,
        settings.trunc_order,
        oracle_n=settings.oracle_n,
        tail=settings.tail_constant,
        tol=settings.tolerance,
        jobs=settings.jobs,
        block_counts={n: census[n].count_B for n in range(1, settings.oracle_n + 1)},
    )
    return ReportTables(
        census=census,
        census_shown=[census[n] for n in range(1, n_max + 1)],
        sandwich=sandwich_table(k, n_max, {n: row.count_A for n, row in census.items()}),
        asymptotics=asymptotic_table(k, settings.trunc_order),
        grammar=gk_class_counts(k, n_max, census=census),
        certificate=certificate,
    )


def write_report_bundle(settings: ReportSettings, bundle_dir: Path, tables: ReportTables | None = None) -> Path:
    """
    Write the Markdown report for ``settings.k`` with its CSV/JSON companions.

    Args:
        settings: Report parameters; ``settings.resources`` is listed in the report when not empty.
        bundle_dir: Target directory, created if missing.
        tables: Precomputed tables; computed here when omitted.

    Returns:
        Path of the Markdown report.
    """
    k = settings.k
    bundle_dir.mkdir(parents=True, exist_ok=True)
    tables = tables or build_report_tables(settings)

    files = {
        "census.csv": to_csv(CENSUS_FIELDS, census_table_rows(tables.census_shown)),
        "sandwich.csv": to_csv(SANDWICH_FIELDS, sandwich_table_rows(tables.sandwich)),
        "asymptotics.csv": to_csv(ASYMPTOTIC_FIELDS, asymptotic_table_rows(tables.asymptotics)),
        "grammar.csv": to_csv(GRAMMAR_FIELDS, grammar_table_rows(tables.grammar)),
        "certificate.json": to_json(certificate_record(tables.certificate)),
    }
    for name, content in files.items():
        (bundle_dir / name).write_text(content)

    context = {
        "k": k,
        "settings": settings,
        "constants": constants_record(k),
        "certificate": certificate_record(tables.certificate),
        "census": tables.census_shown,
        "sandwich": tables.sandwich,
        "sandwich_holds": all(row.holds for row in tables.sandwich),
        "asymptotics": tables.asymptotics[-5:],
        "grammar": tables.grammar,
        "grammar_matches": all(row.match for row in tables.grammar),
        "resources": settings.resources,
        "files": sorted(files),
    }
    report_file = bundle_dir / f"report_k{k}.md"
    report_file.write_text(render_markdown_report(context))
    logger.info("Markdown report generated: {}", report_file)
    return report_file
