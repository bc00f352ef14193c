"""``rqa`` command line: check inputs, answer queries, generate data, benchmark.

Results go to stdout (TSV, byte-stable for fixed inputs); diagnostics and
wall-clock timings go to stderr.

Exit codes: 0 ok, 1 usage, 2 parse/arity, 3 safety, 4 data/evaluation,
5 essential predicate without a mapping.
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

import click

from .core import parse_program, parse_query
from .corpus import SCENARIOS, Scenario, generate
from .errors import DataError, RqaError
from .hybrid import MODES, answer_query
from .mapping import MappingSet, check_arities, parse_mappings, validate_coverage
from .relstore import Catalog, load_catalog

EXIT_USAGE = 1

_file = click.Path(exists=True, dir_okay=False, path_type=Path)


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f"cannot read {path}: {e}") from None


def _load(rules, mappings, catalog):
    if mappings is not None and catalog is None:
        raise click.UsageError("--mappings needs --catalog")
    program = parse_program(_read(rules))
    cat = load_catalog(catalog) if catalog is not None else Catalog()
    mset = parse_mappings(_read(mappings), cat, program) if mappings is not None else MappingSet()
    check_arities(mset, program)
    return program, mset, cat


def _note(message: str):
    click.echo(message, err=True)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Answer conjunctive queries over rules and relational data."""


@cli.command()
@click.option("--rules", type=_file, required=True, help="Rule file.")
@click.option("--mappings", type=_file, help="Mapping file (needs --catalog).")
@click.option("--catalog", type=_file, help="Table catalog.")
def check(rules, mappings, catalog):
    """Validate rules, mappings and data; print OK when nothing is wrong."""
    program, mset, cat = _load(rules, mappings, catalog)
    for table in cat.tables.values():
        table.rows  # forces a full load so bad cells surface here
    if mappings is not None:
        for d in validate_coverage(mset, program):
            _note(str(d))
    click.echo("OK")


@cli.command()
@click.argument("query_text", metavar="QUERY")
@click.option("--rules", type=_file, required=True, help="Rule file.")
@click.option("--mappings", type=_file, help="Mapping file (needs --catalog).")
@click.option("--catalog", type=_file, help="Table catalog.")
@click.option("--mode", type=click.Choice(MODES), default="hybrid", show_default=True)
@click.option("--explain", is_flag=True, help="Print the rewritten program to stderr.")
@click.option("--stats", is_flag=True, help="Append evaluation counters.")
def query(query_text, rules, mappings, catalog, mode, explain, stats):
    """Answer a conjunctive QUERY such as 'Perpetrator(?p)'."""
    program, mset, cat = _load(rules, mappings, catalog)
    q = parse_query(query_text, program, mset)
    answers = answer_query(q, program, mset, cat, mode)
    if explain:
        if answers.magic_program is None:
            _note("% forward mode evaluates the rules unchanged")
        else:
            click.echo(answers.magic_program.to_text(), err=True, nl=False)
    click.echo(answers.to_tsv(stats=stats), nl=False)
    if stats:
        _note(f"wall_ms\t{answers.stats.wall_ms:.1f}")


def _scenario_options(f):
    for opt in reversed(
        [
            click.option("--size", type=int,
                         help="Chain length, node count or crimes multiplier (default 10, crimes 1)."),
            click.option("--k", "k", type=int, default=1, show_default=True, help="Number of chains."),
            click.option("--edges", type=int, help="Edge count for tc-random (default 4 * size)."),
            click.option("--seed", type=int, default=0, show_default=True),
        ]
    ):
        f = opt(f)
    return f


def _scenario(name, size, k, edges, seed) -> Scenario:
    if size is None:
        size = 1 if name == "crimes" else 10
    try:
        return Scenario(name, size, k, edges, seed)
    except ValueError as e:
        raise click.UsageError(str(e)) from None


@cli.command()
@click.option("--scenario", type=click.Choice(SCENARIOS), required=True)
@_scenario_options
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
def gen(scenario, size, k, edges, seed, out):
    """Write a generated scenario (catalog, CSV tables, rules, mappings) to --out."""
    sc = _scenario(scenario, size, k, edges, seed)
    try:
        catalog = generate(sc, out)
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    click.echo(str(catalog))


BENCH_COLUMNS = ("scenario", "mode", "facts_fetched", "facts_derived", "rule_firings", "iterations", "answers")


@cli.command()
@click.option("--scenario", type=click.Choice(SCENARIOS), multiple=True, required=True)
@_scenario_options
@click.option("--mode", type=click.Choice(MODES), multiple=True, help="Repeatable; default all modes.")
@click.option("--query", "query_text", help="Query to run (default depends on the scenario).")
def bench(scenario, size, k, edges, seed, mode, query_text):
    """Generate scenarios and report evaluation counters per mode as TSV."""
    modes = mode or MODES
    click.echo("\t".join(BENCH_COLUMNS))
    with tempfile.TemporaryDirectory(prefix="rqa-bench-") as tmp:
        for name in scenario:
            sc = _scenario(name, size, k, edges, seed)
            out = Path(tmp) / name
            try:
                generate(sc, out)
            except ValueError as e:
                raise click.UsageError(str(e)) from None
            program, mset, cat = _load(out / "rules.dl", out / "mappings.map", out / "catalog.txt")
            q = parse_query(query_text or sc.default_query, program, mset)
            for m in modes:
                answers = answer_query(q, program, mset, cat, m)
                c = answers.stats.counters()
                row = [name, m] + [str(c[col]) for col in BENCH_COLUMNS[2:6]] + [str(len(answers))]
                click.echo("\t".join(row))
                _note(f"{name}\t{m}\twall_ms\t{answers.stats.wall_ms:.1f}")


def main(argv=None) -> int:
    """Run the CLI and return its exit code instead of raising SystemExit."""
    try:
        cli.main(args=argv, prog_name="rqa", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        _note("aborted")
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except RqaError as e:
        _note(f"error: {e}")
        return e.exit_code
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
