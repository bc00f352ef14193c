"""Adornment propagation and the magic-sets rewriting of a program for a query.

Naming of generated predicates (the ``$`` keeps them out of user namespaces):

* ``p$bf``   adorned copy of derived predicate ``p`` for adornment ``bf``
* ``m$p$bf`` magic predicate holding the bound arguments of calls to ``p$bf``

For an essential predicate ``e`` needed under an adornment with bound
positions, ``m$e$bf`` is a trigger predicate: its facts carry the values for
which ``e`` must be fetched from the relational source.

An all-free adornment has nothing to pass sideways, so its rules are left
unguarded instead of being guarded by a nullary magic atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core.analysis import hoist_comparisons
from .core.model import Atom, Comparison, Constant, Fact, Program, Query, Rule, Variable


def adorned_name(pred: str, adornment: str) -> str:
    return f"{pred}${adornment}"


def magic_name(pred: str, adornment: str) -> str:
    return f"m${pred}${adornment}"


def is_internal(pred: str) -> bool:
    return "$" in pred


def original_predicate(name: str) -> str:
    """``anc$bf`` -> ``anc``; ``m$anc$bf`` -> ``anc``; plain names unchanged."""
    if name.startswith("m$"):
        name = name[2:]
    return name.split("$", 1)[0]


def atom_adornment(atom: Atom, bound: set) -> str:
    return "".join(
        "b" if isinstance(t, Constant) or t.name in bound else "f" for t in atom.args
    )


def bound_args(atom: Atom, adornment: str) -> tuple:
    return tuple(t for t, a in zip(atom.args, adornment) if a == "b")


@dataclass(frozen=True)
class AdornedRule:
    rule: Rule  # original (normalized) rule
    head_adornment: str
    body: tuple  # hoisted body literals
    body_adornments: tuple  # per body literal: adornment string for atoms, None for comparisons


@dataclass
class Adornment:
    rules: list = field(default_factory=list)
    derived_needed: list = field(default_factory=list)  # (pred, adornment), discovery order
    essential_needed: list = field(default_factory=list)


def adorn_program(program: Program, query: Query) -> Adornment:
    """Adorned copies of exactly the rules reachable from the query's call patterns.

    Bindings flow left to right through each (comparison-hoisted) body.
    """
    derived = program.derived
    result = Adornment()
    seen = set()
    todo = []

    def need(pred, adornment):
        key = (pred, adornment)
        if key in seen:
            return
        seen.add(key)
        if pred in derived:
            result.derived_needed.append(key)
            todo.append(key)
        else:
            result.essential_needed.append(key)

    for atom in query.atoms:
        need(atom.predicate, atom_adornment(atom, set()))

    while todo:
        pred, adornment = todo.pop(0)
        for rule in program.rules_for(pred):
            head = rule.head
            bound = {
                t.name for t, a in zip(head.args, adornment) if a == "b" and isinstance(t, Variable)
            }
            body = hoist_comparisons(rule.body)
            ads = []
            for lit in body:
                if isinstance(lit, Comparison):
                    ads.append(None)
                    continue
                ad = atom_adornment(lit, bound)
                ads.append(ad)
                need(lit.predicate, ad)
                bound.update(v.name for v in lit.variables())
            result.rules.append(AdornedRule(rule, adornment, tuple(body), tuple(ads)))
    return result


@dataclass(frozen=True)
class FetchGoal:
    predicate: str
    adornment: str
    trigger: str | None  # None: fetch everything once, up front

    @property
    def full(self) -> bool:
        return "b" not in self.adornment


@dataclass(frozen=True)
class MagicProgram:
    rules: tuple
    seeds: tuple  # ground magic / trigger facts from the query constants
    fetch_goals: tuple
    answer_literals: tuple  # the query with atoms renamed to the predicates holding answers
    answer_predicates: tuple  # (query predicate, adornment) pairs

    @property
    def triggers(self) -> dict:
        return {g.trigger: g for g in self.fetch_goals if g.trigger is not None}

    def to_text(self) -> str:
        lines = ["% rules"]
        lines += [str(r) for r in self.rules]
        lines.append("% seeds")
        lines += [str(f) + "." for f in self.seeds]
        lines.append("% fetch goals")
        for g in self.fetch_goals:
            via = f" via {g.trigger}" if g.trigger else " (full)"
            lines.append(f"% {g.predicate} {g.adornment}{via}")
        lines.append("% answer")
        lines.append("% " + ", ".join(str(lit) for lit in self.answer_literals))
        return "\n".join(lines) + "\n"


def _rename(atom: Atom, adornment: str, derived) -> Atom:
    if atom.predicate in derived:
        return Atom(adorned_name(atom.predicate, adornment), atom.args)
    return atom


def magic_transform(program: Program, query: Query, extensional=frozenset()) -> MagicProgram:
    """Rewrite ``program`` so that rules fire only for bindings relevant to ``query``.

    ``extensional`` names predicates with a relational source; a derived
    predicate in this set also receives its stored facts through a bridge rule.
    """
    derived = program.derived
    adorned = adorn_program(program, query)
    rules: list = []
    goals: dict = {}

    def add_rule(rule):
        if rule not in rules:
            rules.append(rule)

    def add_goal(pred, adornment):
        key = (pred, adornment)
        if key not in goals:
            trigger = magic_name(pred, adornment) if "b" in adornment else None
            goals[key] = FetchGoal(pred, adornment, trigger)

    for ar in adorned.rules:
        head = ar.rule.head
        guard = []
        if "b" in ar.head_adornment:
            guard = [Atom(magic_name(head.predicate, ar.head_adornment), bound_args(head, ar.head_adornment))]
        body = [
            lit if ad is None else _rename(lit, ad, derived)
            for lit, ad in zip(ar.body, ar.body_adornments)
        ]
        add_rule(Rule((Atom(adorned_name(head.predicate, ar.head_adornment), head.args),), tuple(guard + body)))
        for i, (lit, ad) in enumerate(zip(ar.body, ar.body_adornments)):
            if ad is None or "b" not in ad:
                continue
            m_head = Atom(magic_name(lit.predicate, ad), bound_args(lit, ad))
            m_body = tuple(guard + body[:i])
            if m_body == (m_head,):
                continue  # tautology, e.g. the left-recursive call of a predicate to itself
            add_rule(Rule((m_head,), m_body))
            if lit.predicate not in derived:
                add_goal(lit.predicate, ad)

    # stored facts of derived-and-mapped predicates flow into their adorned copies
    for pred, ad in adorned.derived_needed:
        if pred not in extensional:
            continue
        arity = program.arities[pred]
        xs = tuple(Variable(f"x{i}") for i in range(arity))
        raw = Atom(pred, xs)
        guard = [Atom(magic_name(pred, ad), bound_args(raw, ad))] if "b" in ad else []
        add_rule(Rule((Atom(adorned_name(pred, ad), xs),), tuple(guard + [raw])))
        add_goal(pred, ad)

    for pred, ad in adorned.essential_needed:
        if "b" not in ad:
            add_goal(pred, ad)

    seeds = []
    answer_literals = []
    answer_preds = []
    for lit in query.literals:
        if isinstance(lit, Comparison):
            answer_literals.append(lit)
            continue
        ad = atom_adornment(lit, set())
        answer_preds.append((lit.predicate, ad))
        if "b" in ad:
            seed = Fact(magic_name(lit.predicate, ad), bound_args(lit, ad))
            if seed not in seeds:
                seeds.append(seed)
            if lit.predicate not in derived:
                add_goal(lit.predicate, ad)
        answer_literals.append(_rename(lit, ad, derived))

    return MagicProgram(
        rules=tuple(rules),
        seeds=tuple(seeds),
        fetch_goals=tuple(goals.values()),
        answer_literals=tuple(answer_literals),
        answer_predicates=tuple(dict.fromkeys(answer_preds)),
    )


__all__ = [
    "AdornedRule",
    "Adornment",
    "FetchGoal",
    "MagicProgram",
    "adorn_program",
    "adorned_name",
    "is_internal",
    "magic_name",
    "magic_transform",
    "original_predicate",
]
