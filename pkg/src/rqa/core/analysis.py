"""Safety checking, predicate dependencies and body ordering."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .model import Atom, Comparison, Program, Query, Rule


@dataclass(frozen=True)
class Violation:
    rule_index: int | None
    variable: str
    reason: str
    rule_text: str = ""
    line: int = 0

    def __str__(self):
        where = "query" if self.rule_index is None else f"rule {self.rule_index}"
        if self.line:
            where += f" (line {self.line})"
        text = f": {self.rule_text}" if self.rule_text else ""
        return f"{where}: variable ?{self.variable} {self.reason}{text}"


class QueryHasNoAtoms(Violation):
    def __init__(self):
        super().__init__(None, "", "")

    def __str__(self):
        return "query: a conjunctive query needs at least one atom"


def _positive_vars(body) -> set:
    return {v.name for lit in body if isinstance(lit, Atom) for v in lit.variables()}


def check_safety(rule: Rule, index: int = 0) -> list:
    """Return the safety violations of a normalized rule (empty list = safe)."""
    bound = _positive_vars(rule.body)
    violations = []
    seen = set()
    for v in rule.head.variables():
        if v.name not in bound and v.name not in seen:
            seen.add(v.name)
            violations.append(
                Violation(index, v.name, "in head is not bound by a positive body atom", str(rule), rule.line)
            )
    for lit in rule.body:
        if isinstance(lit, Comparison):
            for v in lit.variables():
                if v.name not in bound and v.name not in seen:
                    seen.add(v.name)
                    violations.append(
                        Violation(index, v.name, "occurs only in a comparison", str(rule), rule.line)
                    )
    return violations


def check_query_safety(literals) -> list:
    bound = _positive_vars(literals)
    out = []
    if not any(isinstance(lit, Atom) for lit in literals):
        out.append(QueryHasNoAtoms())
    for lit in literals:
        if isinstance(lit, Comparison):
            for v in lit.variables():
                if v.name not in bound:
                    out.append(Violation(None, v.name, "occurs only in a comparison"))
    return out


def dependency_graph(program: Program) -> dict:
    """Adjacency lists: ``p -> [q, ...]`` when a rule for ``p`` uses ``q`` in its body.

    Nodes are every registered predicate, in registration order; successor
    lists are in first-use order.
    """
    graph = {p: [] for p in program.arities}
    for rule in program.rules:
        succ = graph.setdefault(rule.head.predicate, [])
        for atom in rule.body_atoms:
            if atom.predicate not in succ:
                succ.append(atom.predicate)
    return graph


def edges(graph: dict) -> list:
    return [(p, q) for p, succ in graph.items() for q in succ]


def reachable(graph: dict, roots) -> set:
    seen = set(roots)
    todo = deque(seen)
    while todo:
        p = todo.popleft()
        for q in graph.get(p, ()):
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return seen


def relevant_closure(query: Query, program: Program) -> frozenset:
    return frozenset(reachable(dependency_graph(program), [a.predicate for a in query.atoms]))


def hoist_comparisons(body) -> list:
    """Stable reorder placing each comparison right after the atom binding its last variable."""
    atoms = [lit for lit in body if isinstance(lit, Atom)]
    pending = [lit for lit in body if isinstance(lit, Comparison)]
    out = []
    bound: set = set()

    def flush():
        nonlocal pending
        ready = [c for c in pending if all(v.name in bound for v in c.variables())]
        out.extend(ready)
        pending = [c for c in pending if c not in ready]

    flush()
    for atom in atoms:
        out.append(atom)
        bound.update(v.name for v in atom.variables())
        flush()
    # unsafe leftovers keep their relative order at the end
    out.extend(pending)
    return out
