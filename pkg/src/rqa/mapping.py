"""Mapping declarations binding essential predicates to table selections.

A mapping file contains statements of the form::

    map Man(?id) <- from persons where age > 21 and gender = 'Male' select id.

Several mappings for one predicate denote the union of their selections.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .core.model import Fact, Program, Variable
from .core.parser import TokenStream, check_user_name, parse_atom, parse_term, tokenize
from .errors import ArityError, DataError, MappingGapError, ParseError
from .relstore import Catalog, Selection, evaluate_selection, make_selection

log = logging.getLogger(__name__)

_CMP = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class MappingRule:
    predicate: str
    arity: int
    selection: Selection
    line: int = field(default=0, compare=False)

    def __str__(self):
        sel = self.selection
        head = f"{self.predicate}({','.join(f'?v{i}' for i in range(self.arity))})"
        text = f"map {head} <- from {', '.join(sel.tables)}"
        if sel.conditions:
            text += " where " + " and ".join(str(c) for c in sel.conditions)
        return text + " select " + ", ".join(str(r) for r in sel.result) + "."


class MappingSet:
    def __init__(self, rules=()):
        self.rules = tuple(rules)
        self.by_predicate: dict = {}
        self.arities: dict = {}
        for r in self.rules:
            known = self.arities.setdefault(r.predicate, r.arity)
            if known != r.arity:
                raise ArityError(f"mappings for {r.predicate} disagree on arity ({known} vs {r.arity})")
            self.by_predicate.setdefault(r.predicate, []).append(r)

    def __contains__(self, predicate):
        return predicate in self.by_predicate

    def __len__(self):
        return len(self.rules)

    @property
    def predicates(self) -> frozenset:
        return frozenset(self.by_predicate)


def _qcol(ts: TokenStream) -> str:
    tok = ts.current
    if tok.kind not in ("name", "qname"):
        ts.error("expected a column name")
    ts.advance()
    return tok.text


def _is_column(name, tables, catalog) -> bool:
    return any(t in catalog and name in catalog.schema(t).column_names for t in tables)


def _parse_mapping(ts: TokenStream, catalog: Catalog) -> MappingRule:
    line = ts.current.line
    ts.expect("map")
    atom = parse_atom(ts)
    check_user_name(atom.predicate, line)
    if not all(isinstance(a, Variable) for a in atom.args):
        raise ParseError(f"mapping head {atom} must have only variable arguments", line, 1)
    ts.expect("<-")
    ts.expect("from")
    tables = [ts.expect_kind("name", "a table name").text]
    while ts.accept(","):
        tables.append(ts.expect_kind("name", "a table name").text)
    conditions = []
    if ts.accept("where"):
        while True:
            left = _qcol(ts)
            op = ts.current
            if op.kind != "op" or op.text not in _CMP:
                ts.error("expected a comparison operator")
            ts.advance()
            if ts.current.kind == "qname" or (
                ts.current.kind == "name" and _is_column(ts.current.text, tables, catalog)
            ):
                right = _qcol(ts)
            else:
                # any other bare name is a symbol constant
                right = parse_term(ts)
                if isinstance(right, Variable):
                    ts.error("variables are not allowed in mapping conditions")
            conditions.append((left, op.text, right))
            if not ts.accept("and"):
                break
    ts.expect("select")
    result = [_qcol(ts)]
    while ts.accept(","):
        result.append(_qcol(ts))
    ts.expect(".")
    if len(result) != atom.arity:
        raise ArityError(
            f"mapping for {atom.predicate}/{atom.arity} selects {len(result)} column(s)", line, 1
        )
    try:
        selection = make_selection(result, tables, conditions, catalog)
    except DataError as e:
        raise DataError(f"mapping at line {line}: {e}") from None
    return MappingRule(atom.predicate, atom.arity, selection, line)


def parse_mappings(text: str, catalog: Catalog, program: Program | None = None) -> MappingSet:
    """Parse a mapping file against ``catalog``.

    When ``program`` is given, mapped predicates must agree with its arities.
    """
    ts = TokenStream(tokenize(text, qualified=True))
    rules = []
    arities = dict(program.arities) if program is not None else {}
    while ts.current.kind != "eof":
        rule = _parse_mapping(ts, catalog)
        known = arities.setdefault(rule.predicate, rule.arity)
        if known != rule.arity:
            raise ArityError(
                f"predicate {rule.predicate} used with arity {rule.arity} but elsewhere with arity {known}",
                rule.line,
                1,
            )
        rules.append(rule)
    return MappingSet(rules)


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "warning" | "info"
    predicate: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


def validate_coverage(mappings: MappingSet, program: Program) -> list:
    out = []
    for p in program.arities:
        if program.is_essential(p) and p not in mappings:
            out.append(Diagnostic("warning", p, f"essential predicate {p} has no mapping"))
        elif p in program.derived and p in mappings:
            out.append(
                Diagnostic("info", p, f"derived predicate {p} is also mapped; its facts are the union")
            )
    return out


def check_arities(mappings: MappingSet, program: Program):
    for p, n in mappings.arities.items():
        known = program.arities.get(p)
        if known is not None and known != n:
            raise ArityError(f"predicate {p} has arity {known} in the rules but {n} in the mappings")


def fetch(pred: str, pattern: str, bound, mappings: MappingSet, catalog: Catalog) -> set:
    """Facts of ``pred`` from the relational source, restricted at bound positions."""
    rules = mappings.by_predicate.get(pred)
    if not rules:
        raise MappingGapError([pred])
    arity = mappings.arities[pred]
    if len(pattern) != arity or set(pattern) - {"b", "f"}:
        raise ValueError(f"adornment {pattern!r} does not fit {pred}/{arity}")
    bound = list(bound)
    positions = [i for i, a in enumerate(pattern) if a == "b"]
    if len(bound) != len(positions):
        raise ValueError(f"adornment {pattern!r} needs {len(positions)} bound value(s), got {len(bound)}")
    extra = list(zip(positions, bound))
    out = set()
    for rule in rules:
        for row in evaluate_selection(rule.selection, catalog, extra):
            out.add(Fact(pred, row))
    return out


def materialize_all(preds, mappings: MappingSet, catalog: Catalog) -> set:
    out = set()
    for p in sorted(preds):
        if p not in mappings:
            log.warning("predicate %s has no mapping; skipped", p)
            continue
        out |= fetch(p, "f" * mappings.arities[p], (), mappings, catalog)
    return out


__all__ = [
    "Diagnostic",
    "MappingRule",
    "MappingSet",
    "check_arities",
    "fetch",
    "materialize_all",
    "parse_mappings",
    "validate_coverage",
]
