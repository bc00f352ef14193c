"""End-to-end query answering in forward, magic and hybrid modes."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .core.analysis import relevant_closure
from .core.model import Fact, Program, Query, render_constant
from .engine import (
    DEFAULT_MAX_FIRINGS,
    EvalStats,
    WorkingMemory,
    match_literals,
    run_naive,
    run_seminaive,
)
from .errors import MappingGapError
from .magic import FetchGoal, MagicProgram, magic_transform
from .mapping import MappingSet, fetch, materialize_all
from .relstore import Catalog

MODES = ("forward", "magic", "hybrid")
# "naive" answers like forward but with the reference evaluator; used by tests
ALL_MODES = MODES + ("naive",)


@dataclass
class AnswerSet:
    variables: tuple
    rows: tuple
    stats: EvalStats = field(default_factory=EvalStats, compare=False)
    magic_program: MagicProgram | None = field(default=None, compare=False, repr=False)
    fetch_log: list = field(default_factory=list, compare=False, repr=False)

    def __len__(self):
        return len(self.rows)

    def to_tsv(self, stats: bool = False) -> str:
        out = "\t".join("?" + v for v in self.variables) + "\n"
        out += "".join("\t".join(render_constant(c) for c in row) + "\n" for row in self.rows)
        if stats:
            out += "\n" + self.stats.to_lines()
        return out


@dataclass(frozen=True)
class FetchRecord:
    goal: FetchGoal
    trigger_fact: Fact | None
    bound: tuple
    facts: frozenset


def plan_fetch(query: Query, program: Program, mappings: MappingSet) -> list:
    mp = magic_transform(program, query, extensional=mappings.predicates)
    return _checked_goals(mp, mappings)


def _checked_goals(mp: MagicProgram, mappings: MappingSet) -> list:
    gaps = {g.predicate for g in mp.fetch_goals if g.predicate not in mappings}
    if gaps:
        raise MappingGapError(gaps)
    return list(mp.fetch_goals)


def _check_coverage(query, program, mappings) -> frozenset:
    closure = relevant_closure(query, program)
    gaps = {p for p in closure if p not in program.derived and p not in mappings}
    if gaps:
        raise MappingGapError(gaps)
    return closure


def answer_query(
    query: Query,
    program: Program,
    mappings: MappingSet | None = None,
    catalog: Catalog | None = None,
    mode: str = "hybrid",
    max_firings: int = DEFAULT_MAX_FIRINGS,
) -> AnswerSet:
    if mode not in ALL_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    t0 = time.perf_counter()
    mappings = mappings if mappings is not None else MappingSet()
    catalog = catalog if catalog is not None else Catalog()
    closure = _check_coverage(query, program, mappings)
    mapped = closure & mappings.predicates
    mp = None
    log: list = []

    if mode in ("forward", "naive"):
        wm = WorkingMemory(materialize_all(mapped, mappings, catalog))
        fetched = len(wm)
        rules = [r for r in program.rules if r.head.predicate in closure]
        run = run_seminaive if mode == "forward" else run_naive
        stats = run(rules, wm, max_firings=max_firings)
        stats.facts_fetched = fetched
        literals = query.literals
    elif mode == "magic":
        mp = magic_transform(program, query, extensional=mapped)
        wm = WorkingMemory(materialize_all(mapped, mappings, catalog))
        fetched = len(wm)
        for seed in mp.seeds:
            wm.add(seed)
        stats = run_seminaive(mp.rules, wm, max_firings=max_firings)
        stats.facts_fetched = fetched
        literals = mp.answer_literals
    else:
        mp = magic_transform(program, query, extensional=mapped)
        stats, wm = _run_hybrid(mp, mappings, catalog, max_firings, log)
        literals = mp.answer_literals

    rows = match_literals(literals, query.answer_vars, wm)
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return AnswerSet(tuple(query.answer_vars), tuple(sorted(rows)), stats, mp, log)


def _run_hybrid(mp: MagicProgram, mappings, catalog, max_firings, log):
    goals = _checked_goals(mp, mappings)
    wm = WorkingMemory(mp.seeds)
    fetched = 0
    full = set()
    for g in goals:
        if g.full:
            facts = fetch(g.predicate, g.adornment, (), mappings, catalog)
            log.append(FetchRecord(g, None, (), frozenset(facts)))
            fetched += sum(wm.add(f) for f in facts)
            full.add(g.predicate)

    triggers = {g.trigger: g for g in goals if g.trigger is not None}
    done = set()

    def hook(fact):
        goal = triggers[fact.predicate]
        if goal.predicate in full:
            return ()
        key = (goal.predicate, goal.adornment, fact.args)
        if key in done:
            return ()
        done.add(key)
        facts = fetch(goal.predicate, goal.adornment, fact.args, mappings, catalog)
        log.append(FetchRecord(goal, fact, fact.args, frozenset(facts)))
        return sorted(facts)

    stats = run_seminaive(mp.rules, wm, hook, triggers, max_firings)
    stats.facts_fetched += fetched
    return stats, wm


__all__ = [
    "ALL_MODES",
    "MODES",
    "AnswerSet",
    "FetchGoal",
    "FetchRecord",
    "answer_query",
    "plan_fetch",
]
