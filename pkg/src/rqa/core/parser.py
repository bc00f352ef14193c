"""Tokenizer and recursive-descent parser for the rule, query and mapping languages."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ArityError, ParseError, SafetyError
from .model import (
    COMPARATORS,
    ISA,
    Atom,
    Comparison,
    Constant,
    Fact,
    Program,
    Query,
    Rule,
    Variable,
)

_TOKEN_SPEC = [
    ("ws", r"[ \t\r]+"),
    ("nl", r"\n"),
    ("comment", r"%[^\n]*"),
    ("var", r"\?[A-Za-z_][A-Za-z0-9_$]*"),
    ("dec", r"-?\d+\.\d+"),
    ("int", r"-?\d+"),
    ("str", r"'(?:[^'\n]|'')*'"),
    ("qname", r"[A-Za-z_][A-Za-z0-9_$]*\.[A-Za-z_][A-Za-z0-9_$]*"),
    ("name", r"[A-Za-z_][A-Za-z0-9_$]*"),
    ("op", r":-|<-|!=|<=|>=|=|<|>|\(|\)|,|\."),
]

# qualified column names only exist in the mapping language; elsewhere
# "a.b" would swallow a rule terminator.
_RULE_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC if n != "qname"))
_MAP_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, qualified: bool = False) -> list:
    regex = _MAP_RE if qualified else _RULE_RE
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = regex.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset=1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text) -> bool:
        tok = self.current
        return tok.kind in ("op", "name") and tok.text == text

    def accept(self, text) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_kind(self, kind, what) -> Token:
        if self.current.kind != kind:
            self.error(f"expected {what}")
        return self.advance()

    def error(self, message):
        tok = self.current
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.col)


def parse_term(ts: TokenStream):
    tok = ts.current
    if tok.kind == "var":
        ts.advance()
        return Variable(tok.text[1:])
    if tok.kind == "name":
        ts.advance()
        return Constant.symbol(tok.text)
    if tok.kind == "int":
        ts.advance()
        return Constant.integer(int(tok.text))
    if tok.kind == "dec":
        ts.advance()
        return Constant.decimal(tok.text)
    if tok.kind == "str":
        ts.advance()
        return Constant.text(tok.text[1:-1].replace("''", "'"))
    ts.error("expected a term")


def parse_atom(ts: TokenStream) -> Atom:
    name = ts.expect_kind("name", "a predicate name")
    ts.expect("(")
    args = [parse_term(ts)]
    while ts.accept(","):
        args.append(parse_term(ts))
    ts.expect(")")
    if len(args) > 2:
        raise ArityError(
            f"predicate {name.text} has arity {len(args)}; only unary and binary predicates are allowed",
            name.line,
            name.col,
        )
    return Atom(name.text, tuple(args))


def _starts_atom(ts: TokenStream) -> bool:
    return ts.current.kind == "name" and ts.peek().text == "("


def parse_literal(ts: TokenStream):
    if _starts_atom(ts):
        return parse_atom(ts)
    left = parse_term(ts)
    tok = ts.current
    if tok.kind != "op" or tok.text not in COMPARATORS:
        ts.error("expected a comparison operator")
    ts.advance()
    return Comparison(left, tok.text, parse_term(ts))


def parse_body(ts: TokenStream) -> tuple:
    lits = [parse_literal(ts)]
    while ts.accept(","):
        lits.append(parse_literal(ts))
    return tuple(lits)


def parse_statements(text: str) -> list:
    """Parse rule-language source into raw rules (heads not yet split)."""
    ts = TokenStream(tokenize(text))
    rules = []
    while ts.current.kind != "eof":
        line = ts.current.line
        heads = [parse_atom(ts)]
        while ts.accept(","):
            heads.append(parse_atom(ts))
        body = ()
        if ts.accept(":-"):
            body = parse_body(ts)
        elif len(heads) > 1:
            ts.error("expected ':-' after a conjunctive head")
        ts.expect(".")
        rules.append(Rule(tuple(heads), body, line))
    return rules


def lloyd_topor_split(rule: Rule) -> list:
    """One rule per head conjunct, each keeping the full body."""
    if len(rule.heads) == 1:
        return [rule]
    return [Rule((h,), rule.body, rule.line) for h in rule.heads]


def _literal_atoms(lits):
    return [lit for lit in lits if isinstance(lit, Atom)]


def register_arities(atoms, arities: dict, line=None, check_names=True):
    """Record predicate arities, raising on the first conflict."""
    for atom in atoms:
        if check_names:
            check_user_name(atom.predicate, line)
        known = arities.setdefault(atom.predicate, atom.arity)
        if known != atom.arity:
            raise ArityError(
                f"predicate {atom.predicate} used with arity {atom.arity} but elsewhere with arity {known}",
                line,
                None if line is None else 1,
            )


def check_user_name(name, line):
    if name == ISA:
        raise ParseError(f"predicate name {ISA!r} is reserved", line, None if line is None else 1)
    if "$" in name:
        raise ParseError(f"predicate name {name!r} uses the internal '$' namespace", line, None if line is None else 1)


def parse_program(text: str, allow_internal: bool = False) -> Program:
    """Parse, Lloyd-Topor normalize and safety-check a rule program."""
    from .analysis import check_safety

    arities: dict = {}
    rules = []
    for raw in parse_statements(text):
        register_arities(list(raw.heads) + _literal_atoms(raw.body), arities, raw.line, not allow_internal)
        rules.extend(lloyd_topor_split(raw))
    violations = []
    for i, rule in enumerate(rules):
        violations.extend(check_safety(rule, i))
    if violations:
        raise SafetyError(violations)
    return Program(tuple(rules), arities)


def parse_query(text: str, program: Program | None = None, mappings=None) -> Query:
    """Parse a conjunctive query and check it against known predicate arities.

    When neither ``program`` nor ``mappings`` is given, predicates are not
    checked for existence.
    """
    ts = TokenStream(tokenize(text))
    if ts.current.kind == "eof":
        ts.error("empty query")
    literals = parse_body(ts)
    if ts.current.kind != "eof":
        ts.error("expected ',' or end of query")

    known: dict | None = None
    if program is not None or mappings is not None:
        known = {}
        if program is not None:
            known.update(program.arities)
        if mappings is not None:
            for p, n in mappings.arities.items():
                known.setdefault(p, n)
    atoms = _literal_atoms(literals)
    for atom in atoms:
        check_user_name(atom.predicate, None)
        if known is None:
            continue
        if atom.predicate not in known:
            raise ParseError(f"unknown predicate {atom.predicate}")
        if known[atom.predicate] != atom.arity:
            raise ArityError(
                f"predicate {atom.predicate} has arity {known[atom.predicate]}, query uses {atom.arity}"
            )

    from .analysis import check_query_safety

    violations = check_query_safety(literals)
    if violations:
        raise SafetyError(violations)
    seen = []
    for atom in atoms:
        for v in atom.variables():
            if v.name not in seen:
                seen.append(v.name)
    return Query(literals, tuple(seen))


def parse_constant(text: str) -> Constant:
    ts = TokenStream(tokenize(text))
    term = parse_term(ts)
    if ts.current.kind != "eof" or isinstance(term, Variable):
        raise ParseError(f"not a constant: {text!r}")
    return term


# a field is a run of quoted text and non-tab characters, so tabs inside text constants survive
_TRIPLE_FIELD = re.compile(r"(?:'(?:[^']|'')*'|[^\t'])+")


def parse_triples(text: str) -> set:
    """Inverse of :func:`dump_triples`."""
    facts = set()
    for n, line in enumerate(text.split("\n"), 1):
        if not line:
            continue
        parts = _TRIPLE_FIELD.findall(line)
        if len(parts) != 3 or "\t".join(parts) != line:
            raise ParseError("triple lines need exactly three tab-separated fields", n, 1)
        s, p, o = parts
        obj = o if p == ISA else parse_constant(o)
        facts.add(Fact.from_triple(parse_constant(s), p, obj))
    return facts
