"""Terms, atoms, rules, programs, facts and queries.

All types are immutable. Constants are plain named tuples so that facts hash
and compare at C speed inside the working memory; integer and decimal values
share the ``num`` kind and therefore compare (and hash) numerically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Mapping, NamedTuple, Union

from ..errors import EvaluationError

SYM = "sym"
NUM = "num"
TEXT = "text"

ISA = "isa"
COMPARATORS = ("=", "!=", "<", "<=", ">", ">=")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __str__(self):
        return "?" + self.name


class Constant(NamedTuple):
    kind: str
    value: object

    @classmethod
    def symbol(cls, name: str) -> "Constant":
        return cls(SYM, name)

    @classmethod
    def integer(cls, value: int) -> "Constant":
        return cls(NUM, int(value))

    @classmethod
    def decimal(cls, value) -> "Constant":
        return cls(NUM, Decimal(value))

    @classmethod
    def text(cls, value: str) -> "Constant":
        return cls(TEXT, value)

    @property
    def type_name(self) -> str:
        if self.kind == NUM:
            return "decimal" if isinstance(self.value, Decimal) else "integer"
        return "symbol" if self.kind == SYM else "text"

    def __str__(self):
        return render_constant(self)


Term = Union[Variable, Constant]


def render_constant(c: Constant) -> str:
    if c.kind == SYM:
        return c.value
    if c.kind == TEXT:
        return "'" + c.value.replace("'", "''") + "'"
    if isinstance(c.value, Decimal):
        s = format(c.value, "f")
        return s if "." in s else s + ".0"
    return str(c.value)


def render_term(t: Term) -> str:
    return str(t) if isinstance(t, Variable) else render_constant(t)


def is_symbol_name(s: str) -> bool:
    return bool(_IDENT.match(s))


def compare_constants(left: Constant, op: str, right: Constant) -> bool:
    """Evaluate ``left op right``.

    Equality across value types is simply false; ordering across types raises.
    """
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if left.kind != right.kind:
        raise EvaluationError(
            f"cannot order {left.type_name} {render_constant(left)} "
            f"against {right.type_name} {render_constant(right)}"
        )
    a, b = left.value, right.value
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparator {op!r}")


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self):
        return [a for a in self.args if isinstance(a, Variable)]

    def is_ground(self) -> bool:
        return not any(isinstance(a, Variable) for a in self.args)

    def __str__(self):
        return f"{self.predicate}({','.join(render_term(a) for a in self.args)})"


@dataclass(frozen=True, slots=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def variables(self):
        return [t for t in (self.left, self.right) if isinstance(t, Variable)]

    def __str__(self):
        return f"{render_term(self.left)} {self.op} {render_term(self.right)}"


Literal = Union[Atom, Comparison]


@dataclass(frozen=True)
class Rule:
    heads: tuple
    body: tuple = ()
    line: int = field(default=0, compare=False)

    @property
    def head(self) -> Atom:
        if len(self.heads) != 1:
            raise ValueError("rule has a conjunctive head; apply lloyd_topor_split first")
        return self.heads[0]

    @property
    def body_atoms(self):
        return [lit for lit in self.body if isinstance(lit, Atom)]

    def __str__(self):
        head = ", ".join(str(a) for a in self.heads)
        if not self.body:
            return head + "."
        return f"{head} :- {', '.join(str(lit) for lit in self.body)}."


@dataclass(frozen=True)
class Program:
    rules: tuple = ()
    arities: Mapping[str, int] = field(default_factory=dict)

    @property
    def derived(self) -> frozenset:
        return frozenset(r.head.predicate for r in self.rules)

    @property
    def essential(self) -> frozenset:
        return frozenset(self.arities) - self.derived

    def is_essential(self, predicate: str) -> bool:
        return predicate in self.arities and predicate not in self.derived

    def rules_for(self, predicate: str):
        return [r for r in self.rules if r.head.predicate == predicate]

    def to_text(self) -> str:
        return "".join(str(r) + "\n" for r in self.rules)


class Fact(NamedTuple):
    predicate: str
    args: tuple

    def __str__(self):
        return f"{self.predicate}({','.join(render_constant(a) for a in self.args)})"

    def to_triple(self) -> tuple:
        if len(self.args) == 1:
            return (self.args[0], ISA, self.predicate)
        return (self.args[0], self.predicate, self.args[1])

    @classmethod
    def from_triple(cls, subject: Constant, predicate: str, obj) -> "Fact":
        if predicate == ISA:
            return cls(obj, (subject,))
        return cls(predicate, (subject, obj))

    @classmethod
    def from_atom(cls, atom: Atom) -> "Fact":
        if not atom.is_ground():
            raise ValueError(f"atom {atom} is not ground")
        return cls(atom.predicate, tuple(atom.args))


def triple_line(fact: Fact) -> str:
    s, p, o = fact.to_triple()
    return "\t".join((render_constant(s), p, o if p == ISA else render_constant(o)))


def dump_triples(facts) -> str:
    """Tab-separated triple dump, one fact per line, sorted."""
    return "".join(line + "\n" for line in sorted(triple_line(f) for f in facts))


@dataclass(frozen=True)
class Query:
    literals: tuple
    answer_vars: tuple

    @property
    def atoms(self):
        return [lit for lit in self.literals if isinstance(lit, Atom)]

    @property
    def comparisons(self):
        return [lit for lit in self.literals if isinstance(lit, Comparison)]

    def __str__(self):
        return ", ".join(str(lit) for lit in self.literals)


def apply_substitution(atom: Atom, subst: Mapping[str, Constant]) -> Fact:
    args = []
    for a in atom.args:
        if isinstance(a, Variable):
            args.append(subst[a.name])
        else:
            args.append(a)
    return Fact(atom.predicate, tuple(args))
