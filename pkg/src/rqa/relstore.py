"""CSV-backed tables and evaluation of SELECT-style selections."""

from __future__ import annotations

import csv
import enum
import itertools
import re
import threading
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .core.model import NUM, SYM, TEXT, Constant, compare_constants, is_symbol_name, render_constant
from .errors import DataError


class ColumnType(str, enum.Enum):
    INT = "int"
    DEC = "dec"
    STR = "str"
    SYM = "sym"

    @property
    def kind(self) -> str:
        return {"int": NUM, "dec": NUM, "str": TEXT, "sym": SYM}[self.value]


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple  # of (name, ColumnType)

    def __post_init__(self):
        names = self.column_names
        if len(set(names)) != len(names):
            raise DataError(f"table {self.name}: duplicate column names")

    @property
    def column_names(self) -> tuple:
        return tuple(c for c, _ in self.columns)

    def index(self, column: str) -> int:
        return self.column_names.index(column)

    def type_of(self, column: str) -> ColumnType:
        return self.columns[self.index(column)][1]


def convert_cell(raw: str, ctype: ColumnType) -> Constant:
    if raw == "":
        raise ValueError("empty cell")
    if ctype is ColumnType.INT:
        return Constant.integer(int(raw))
    if ctype is ColumnType.DEC:
        try:
            return Constant.decimal(Decimal(raw))
        except InvalidOperation:
            raise ValueError(f"not a decimal: {raw!r}") from None
    if ctype is ColumnType.SYM:
        if not is_symbol_name(raw):
            raise ValueError(f"not a symbol: {raw!r}")
        return Constant.symbol(raw)
    return Constant.text(raw)


class Table:
    """A typed table whose rows are parsed on first scan and then cached."""

    def __init__(self, schema: TableSchema, path: Path | None = None, rows=None):
        self.schema = schema
        self.path = path
        self._rows = None if rows is None else tuple(tuple(r) for r in rows)
        self._lock = threading.Lock()
        self._indexes: dict = {}

    @classmethod
    def from_values(cls, schema: TableSchema, rows) -> "Table":
        """Build an in-memory table from raw Python values (validated by column type)."""
        typed = []
        for n, row in enumerate(rows, 1):
            if len(row) != len(schema.columns):
                raise DataError(f"table {schema.name}: row {n} has {len(row)} fields")
            try:
                typed.append(tuple(convert_cell(str(v), t) for v, (_, t) in zip(row, schema.columns)))
            except ValueError as e:
                raise DataError(f"table {schema.name}: row {n}: {e}") from None
        return cls(schema, rows=typed)

    def index(self, column: str) -> dict:
        """Hash index value -> rows for one column, built on first use."""
        idx = self._indexes.get(column)
        if idx is None:
            rows = self.rows
            i = self.schema.index(column)
            built: dict = {}
            for r in rows:
                built.setdefault(r[i], []).append(r)
            with self._lock:
                idx = self._indexes.setdefault(column, built)
        return idx

    @property
    def rows(self) -> tuple:
        if self._rows is None:
            with self._lock:
                if self._rows is None:
                    self._rows = self._load()
        return self._rows

    def _load(self) -> tuple:
        types = [t for _, t in self.schema.columns]
        out = []
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for row in reader:
                lineno = reader.line_num
                if not row:
                    continue
                if len(row) != len(types):
                    raise DataError(
                        f"{self.path}: row {lineno}: expected {len(types)} fields, got {len(row)}"
                    )
                try:
                    out.append(tuple(convert_cell(v, t) for v, t in zip(row, types)))
                except ValueError as e:
                    raise DataError(f"{self.path}: row {lineno}: {e}") from None
        return tuple(out)


class Catalog:
    def __init__(self, tables=()):
        self.tables: dict = {}
        for t in tables:
            self.add(t)

    def add(self, table: Table):
        if table.schema.name in self.tables:
            raise DataError(f"duplicate table {table.schema.name}")
        self.tables[table.schema.name] = table

    def __contains__(self, name):
        return name in self.tables

    def __getitem__(self, name) -> Table:
        return self.tables[name]

    def schema(self, name) -> TableSchema:
        return self.tables[name].schema


_CATALOG_LINE = re.compile(r"table\s+(\S+)\s+file\s+(\S+)\s+columns\s+(.+)\Z")


def parse_columns(spec: str) -> tuple:
    cols = []
    for item in spec.split(","):
        name, sep, typ = item.strip().partition(":")
        if not sep or not name:
            raise ValueError(f"malformed column {item.strip()!r}")
        try:
            cols.append((name, ColumnType(typ.strip())))
        except ValueError:
            raise ValueError(f"unknown column type {typ.strip()!r}") from None
    return tuple(cols)


def load_catalog(path) -> Catalog:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read catalog {path}: {e.strerror}") from None
    catalog = Catalog()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("%", 1)[0].strip()
        if not line:
            continue
        m = _CATALOG_LINE.match(line)
        if m is None:
            raise DataError(f"{path}: line {lineno}: malformed catalog line")
        name, rel, colspec = m.groups()
        try:
            schema = TableSchema(name, parse_columns(colspec))
        except ValueError as e:
            raise DataError(f"{path}: line {lineno}: {e}") from None
        csv_path = path.parent / rel
        try:
            with open(csv_path, newline="", encoding="utf-8") as fh:
                header = next(csv.reader(fh), None)
        except OSError:
            raise DataError(f"table {name}: missing data file {csv_path}") from None
        if header is None or tuple(h.strip() for h in header) != schema.column_names:
            raise DataError(
                f"table {name}: header of {csv_path} does not match declared columns "
                f"{', '.join(schema.column_names)}"
            )
        catalog.add(Table(schema, csv_path))
    return catalog


@dataclass(frozen=True)
class ColumnRef:
    table: str
    column: str

    def __str__(self):
        return f"{self.table}.{self.column}"


@dataclass(frozen=True)
class Condition:
    left: ColumnRef
    op: str
    right: object  # ColumnRef | Constant

    def tables(self) -> set:
        out = {self.left.table}
        if isinstance(self.right, ColumnRef):
            out.add(self.right.table)
        return out

    def __str__(self):
        r = str(self.right) if isinstance(self.right, ColumnRef) else render_constant(self.right)
        return f"{self.left} {self.op} {r}"


@dataclass(frozen=True)
class Selection:
    result: tuple  # of ColumnRef, length 1 or 2
    tables: tuple
    conditions: tuple = ()


def resolve_column(name: str, tables, catalog: Catalog) -> ColumnRef:
    if "." in name:
        table, column = name.split(".", 1)
        if table not in tables:
            raise DataError(f"column {name}: table {table} is not in the FROM list")
        if column not in catalog.schema(table).column_names:
            raise DataError(f"unknown column {name}")
        return ColumnRef(table, column)
    owners = [t for t in tables if name in catalog.schema(t).column_names]
    if not owners:
        raise DataError(f"unknown column {name}")
    if len(owners) > 1:
        raise DataError(f"ambiguous column {name} (in {', '.join(owners)}); qualify it")
    return ColumnRef(owners[0], name)


def make_selection(result, tables, conditions, catalog: Catalog) -> Selection:
    """Build and validate a selection from column names.

    ``conditions`` holds ``(column, op, column-name-or-Constant)`` triples.
    """
    tables = tuple(tables)
    for t in tables:
        if t not in catalog:
            raise DataError(f"unknown table {t}")
    if len(set(tables)) != len(tables):
        raise DataError("a table may appear only once in FROM")
    res = tuple(resolve_column(c, tables, catalog) for c in result)
    conds = []
    for left, op, right in conditions:
        lref = resolve_column(left, tables, catalog)
        rval = right if isinstance(right, Constant) else resolve_column(right, tables, catalog)
        conds.append(Condition(lref, op, rval))
    sel = Selection(res, tables, tuple(conds))
    validate_selection(sel, catalog)
    return sel


def _kind(ref_or_const, catalog) -> str:
    if isinstance(ref_or_const, ColumnRef):
        return catalog.schema(ref_or_const.table).type_of(ref_or_const.column).kind
    return ref_or_const.kind


def validate_selection(sel: Selection, catalog: Catalog):
    if len(sel.result) not in (1, 2):
        raise DataError("a selection returns one or two columns")
    if not sel.tables:
        raise DataError("a selection needs at least one table")
    for ref in list(sel.result) + [c.left for c in sel.conditions] + [
        c.right for c in sel.conditions if isinstance(c.right, ColumnRef)
    ]:
        if ref.table not in sel.tables or ref.column not in catalog.schema(ref.table).column_names:
            raise DataError(f"unknown column {ref}")
    for cond in sel.conditions:
        lk, rk = _kind(cond.left, catalog), _kind(cond.right, catalog)
        if lk != rk:
            raise DataError(f"type mismatch in constraint {cond}: {lk} vs {rk}")


def evaluate_selection(sel: Selection, catalog: Catalog, extra=()) -> list:
    """Rows of the filtered cross product of ``sel.tables``, projected to ``sel.result``.

    ``extra`` is a list of ``(result position, Constant)`` equalities used for
    binding pushdown. Output is duplicate-free and sorted.
    """
    validate_selection(sel, catalog)
    tables = sel.tables
    pos = {t: i for i, t in enumerate(tables)}
    col = {
        (t, c): catalog.schema(t).index(c) for t in tables for c in catalog.schema(t).column_names
    }

    local = {t: [] for t in tables}  # filters touching one table
    cross = []
    for cond in sel.conditions:
        ts = cond.tables()
        if len(ts) == 1:
            local[next(iter(ts))].append(cond)
        else:
            cross.append(cond)
    for p, value in extra:
        ref = sel.result[p]
        local[ref.table].append(Condition(ref, "=", value))

    def value_of(ref, rows):
        return rows[pos[ref.table]][col[(ref.table, ref.column)]]

    def single(cond, row):
        left = row[col[(cond.left.table, cond.left.column)]]
        right = cond.right
        if isinstance(right, ColumnRef):
            right = row[col[(right.table, right.column)]]
        return compare_constants(left, cond.op, right)

    filtered = {}
    for t in tables:
        conds = local[t]
        rows = catalog[t].rows
        for c in conds:
            if c.op == "=" and isinstance(c.right, Constant):
                rows = catalog[t].index(c.left.column).get(c.right, ())
                break
        filtered[t] = [r for r in rows if all(single(c, r) for c in conds)]

    # left-to-right joins; an equality to an already joined table becomes a hash join
    partial = [(r,) for r in filtered[tables[0]]]
    joined = {tables[0]}
    pending = list(cross)
    for t in tables[1:]:
        keys = [
            c for c in pending
            if c.op == "=" and {c.left.table, c.right.table} <= joined | {t}
            and t in (c.left.table, c.right.table) and c.left.table != c.right.table
        ]
        if keys:
            probe = []
            for c in keys:
                mine, other = (c.left, c.right) if c.left.table == t else (c.right, c.left)
                probe.append((col[(t, mine.column)], other))
            buckets = {}
            for r in filtered[t]:
                buckets.setdefault(tuple(r[i] for i, _ in probe), []).append(r)
            partial = [
                rows + (r,)
                for rows in partial
                for r in buckets.get(tuple(value_of(o, rows) for _, o in probe), ())
            ]
            pending = [c for c in pending if c not in keys]
        else:
            partial = [rows + (r,) for rows, r in itertools.product(partial, filtered[t])]
        joined.add(t)
        ready = [c for c in pending if c.tables() <= joined]
        if ready:
            partial = [
                rows for rows in partial
                if all(compare_constants(value_of(c.left, rows), c.op, value_of(c.right, rows)) for c in ready)
            ]
            pending = [c for c in pending if c not in ready]

    out = {tuple(value_of(ref, rows) for ref in sel.result) for rows in partial}
    return sorted(out)


__all__ = [
    "Catalog",
    "ColumnRef",
    "ColumnType",
    "Condition",
    "Selection",
    "Table",
    "TableSchema",
    "evaluate_selection",
    "load_catalog",
    "make_selection",
]
