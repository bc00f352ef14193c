"""Fixtures and synthetic data: graph scenarios for benchmarks and a small
economic-crimes knowledge base (money, invoice and document flows).

Every scenario is written as ``catalog.txt`` + CSV tables + ``rules.dl`` +
``mappings.map`` so it can be fed straight to the CLI.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import DataError

SCENARIOS = ("chain", "multichain", "tc-random", "crimes")

# Left-recursive on purpose: with anc(c0,?y) the magic rewrite keeps a single
# magic fact for anc and the derivation stays linear in the chain length.
ANCESTOR_RULES = """\
anc(?x,?y) :- par(?x,?y).
anc(?x,?z) :- anc(?x,?y), par(?y,?z).
"""

PAR_MAPPING = "map par(?x,?y) <- from par select src, dst.\n"
PAR_CATALOG = "table par file par.csv columns src:sym,dst:sym\n"


@dataclass(frozen=True)
class Scenario:
    name: str
    size: int = 10  # chain length N, multichain length L, tc-random nodes, crimes multiplier
    k: int = 1  # number of chains (multichain)
    edges: int | None = None  # tc-random edge count, default 4 * size
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        if self.size < 1 or self.k < 1 or (self.edges is not None and self.edges < 1):
            raise ValueError("scenario sizes must be >= 1")

    @property
    def edge_count(self) -> int:
        return self.edges if self.edges is not None else 4 * self.size

    @property
    def default_query(self) -> str:
        return {
            "chain": "anc(c0,?y)",
            "multichain": "anc(a0,?y)",
            "tc-random": "anc(?x,?y)",
            "crimes": "Perpetrator(?p)",
        }[self.name]


@dataclass
class Dataset:
    """In-memory form of a generated scenario."""

    rules: str
    mappings: str
    catalog: str
    tables: dict = field(default_factory=dict)  # csv file name -> (header, rows)

    def write(self, out) -> Path:
        out = Path(out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "rules.dl").write_text(self.rules, encoding="utf-8")
            (out / "mappings.map").write_text(self.mappings, encoding="utf-8")
            (out / "catalog.txt").write_text(self.catalog, encoding="utf-8")
            for name, (header, rows) in self.tables.items():
                (out / name).write_text(csv_text(header, rows), encoding="utf-8", newline="")
        except OSError as e:
            raise DataError(f"cannot write scenario to {out}: {e.strerror}") from None
        return out


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def chain_names(k: int) -> list:
    """a, b, ..., z, aa, ab, ... for k chains."""
    out = []
    for i in range(k):
        s = ""
        i += 1
        while i:
            i, r = divmod(i - 1, 26)
            s = chr(ord("a") + r) + s
        out.append(s)
    return out


def _graph(rows) -> Dataset:
    return Dataset(ANCESTOR_RULES, PAR_MAPPING, PAR_CATALOG, {"par.csv": (("src", "dst"), rows)})


def chain_rows(n: int, prefix: str = "c") -> list:
    return [(f"{prefix}{i}", f"{prefix}{i + 1}") for i in range(n)]


def random_edges(nodes: int, edges: int, seed: int) -> list:
    if edges > nodes * (nodes - 1):
        raise ValueError(f"{edges} distinct edges do not fit in {nodes} nodes")
    rng = random.Random(seed)
    seen = set()
    while len(seen) < edges:
        u, v = rng.randrange(nodes), rng.randrange(nodes)
        if u != v:
            seen.add((u, v))
    return sorted(seen)


def build(scenario: Scenario) -> Dataset:
    if scenario.name == "chain":
        return _graph(chain_rows(scenario.size))
    if scenario.name == "multichain":
        rows = []
        for name in chain_names(scenario.k):
            rows += chain_rows(scenario.size, name)
        return _graph(rows)
    if scenario.name == "tc-random":
        pairs = random_edges(scenario.size, scenario.edge_count, scenario.seed)
        return _graph([(f"n{u}", f"n{v}") for u, v in pairs])
    return crimes_dataset(scenario.size)


def generate(scenario: Scenario, out) -> Path:
    """Write the scenario into ``out``; returns the catalog path."""
    build(scenario).write(out)
    return Path(out) / "catalog.txt"


# -- economic crimes ------------------------------------------------------

CRIMES_RULES = """\
% document flow
Document(?d) :- Invoice(?d).
Document(?d) :- Confirmation(?d).
ConfirmedInvoice(?i) :- confirms(?d,?i).

% roles inside companies
Director(?p), Manager(?p) :- directorOf(?p,?c).
Chairman(?p), Manager(?p) :- chairmanOf(?p,?c).
Employee(?p) :- worksAt(?p,?c).

% money flow
moneyFlow(?a,?b) :- Transfer(?t), payer(?t,?a), payee(?t,?b).
LargeTransfer(?t) :- Transfer(?t), hasAmount(?t,?a), ?a > 10000.

% qualification
LaundersProceeds(?t) :- Transfer(?t), basedOn(?t,?i), FictitiousInvoice(?i).
DamagedCompany(?c) :- LaundersProceeds(?t), payer(?t,?c), VictimCompany(?c).
Perpetrator(?p) :- Director(?p), authorized(?p,?t), LaundersProceeds(?t).
Beneficiary(?p) :- Chairman(?p), chairmanOf(?p,?c), payee(?t,?c), paidToShell(?t), LaundersProceeds(?t).
sanctionedBy(?p,art296) :- Perpetrator(?p).
"""

CRIMES_MAPPINGS = """\
map Company(?c) <- from companies select id.
map VictimCompany(?c) <- from companies where kind = victim select id.
map ShellCompany(?c) <- from companies where kind = shell select id.
map Person(?p) <- from persons select id.
map directorOf(?p,?c) <- from roles where role = director select person, company.
map chairmanOf(?p,?c) <- from roles where role = chairman select person, company.
map worksAt(?p,?c) <- from roles select person, company.
map Invoice(?i) <- from invoices select id.
map FictitiousInvoice(?i) <- from invoices where fictitious = 1 select id.
map issuedBy(?i,?c) <- from invoices select id, issuer.
map Transfer(?t) <- from transfers select id.
map payer(?t,?c) <- from transfers select id, payer.
map payee(?t,?c) <- from transfers select id, payee.
map basedOn(?t,?i) <- from transfers select id, basedOn.
map authorized(?p,?t) <- from transfers select authorizer, id.
map hasAmount(?t,?a) <- from transfers select id, amount.
map Confirmation(?d) <- from confirmations select id.
map confirms(?d,?i) <- from confirmations select id, invoice.
map paidToShell(?t) <- from transfers, companies where transfers.payee = companies.id and companies.kind = shell select transfers.id.
"""

CRIMES_CATALOG = """\
% economic crimes micro-case
table companies file companies.csv columns id:sym,name:str,kind:sym
table persons file persons.csv columns id:sym,name:str
table roles file roles.csv columns person:sym,role:sym,company:sym
table invoices file invoices.csv columns id:sym,issuer:sym,recipient:sym,amount:dec,fictitious:int
table transfers file transfers.csv columns id:sym,payer:sym,payee:sym,amount:dec,basedOn:sym,authorizer:sym
table confirmations file confirmations.csv columns id:sym,invoice:sym,issuer:sym
"""


def crimes_dataset(multiplier: int = 1, fictitious: bool = True) -> Dataset:
    """The micro-case, replicated ``multiplier`` times with disjoint identifiers.

    Copy 0 uses the bare identifiers (A, B, p1, ...); copy j > 0 appends ``_j``.
    """
    companies, persons, roles, invoices, transfers, confirmations = ([] for _ in range(6))
    for j in range(multiplier):
        s = "" if j == 0 else f"_{j}"
        companies += [(f"A{s}", "Alpha Trading", "victim"), (f"B{s}", "Beta Consulting", "shell")]
        persons += [(f"p1{s}", "Jan Nowak"), (f"p2{s}", "Anna Kowalska"), (f"p3{s}", "Piotr Lis")]
        roles += [
            (f"p1{s}", "director", f"A{s}"),
            (f"p2{s}", "chairman", f"B{s}"),
            (f"p3{s}", "clerk", f"A{s}"),
        ]
        invoices += [
            (f"i1{s}", f"B{s}", f"A{s}", "50000.00", 1 if fictitious else 0),
            (f"i2{s}", f"B{s}", f"A{s}", "1200.00", 0),
        ]
        transfers += [
            (f"t1{s}", f"A{s}", f"B{s}", "50000.00", f"i1{s}", f"p1{s}"),
            (f"t2{s}", f"A{s}", f"B{s}", "1200.00", f"i2{s}", f"p3{s}"),
        ]
        confirmations += [(f"d1{s}", f"i2{s}", f"A{s}")]
    tables = {
        "companies.csv": (("id", "name", "kind"), companies),
        "persons.csv": (("id", "name"), persons),
        "roles.csv": (("person", "role", "company"), roles),
        "invoices.csv": (("id", "issuer", "recipient", "amount", "fictitious"), invoices),
        "transfers.csv": (("id", "payer", "payee", "amount", "basedOn", "authorizer"), transfers),
        "confirmations.csv": (("id", "invoice", "issuer"), confirmations),
    }
    return Dataset(CRIMES_RULES, CRIMES_MAPPINGS, CRIMES_CATALOG, tables)


PERSONS_ROWS = [(1, "Ann", 30, "Female"), (2, "Bob", 45, "Male"), (3, "Cal", 15, "Male")]


def persons_dataset() -> Dataset:
    """Three-row persons table with the Man/hasAge mappings and the Woman/Person hierarchy."""
    return Dataset(
        rules="Woman(?x) :- Mother(?x).\nPerson(?x) :- Woman(?x).\nPerson(?x) :- Man(?x).\n",
        mappings=(
            "map Man(?id) <- from persons where age > 21 and gender = 'Male' select id.\n"
            "map hasAge(?id,?a) <- from persons select id, age.\n"
            "map Mother(?id) <- from persons where id = 1 select id.\n"
        ),
        catalog="table persons file persons.csv columns id:int,name:str,age:int,gender:str\n",
        tables={"persons.csv": (("id", "name", "age", "gender"), PERSONS_ROWS)},
    )


@dataclass
class CrimesFixture:
    dataset: Dataset
    queries: dict  # name -> query text
    expected: dict  # name -> golden AnswerSet TSV

    def write(self, out) -> Path:
        return self.dataset.write(out)


def crimes_fixture() -> CrimesFixture:
    data = resources.files("rqa") / "data" / "crimes"
    queries = {}
    for line in (data / "queries.tsv").read_text(encoding="utf-8").splitlines():
        if line and not line.startswith("%"):
            name, text = line.split("\t", 1)
            queries[name] = text
    expected = {name: (data / f"{name}.tsv").read_text(encoding="utf-8") for name in queries}
    return CrimesFixture(crimes_dataset(1), queries, expected)


__all__ = [
    "ANCESTOR_RULES",
    "SCENARIOS",
    "CrimesFixture",
    "Dataset",
    "Scenario",
    "build",
    "chain_names",
    "crimes_dataset",
    "crimes_fixture",
    "generate",
    "persons_dataset",
    "random_edges",
]
