"""Bottom-up evaluation: an indexed working memory, a naive fixpoint used as
the reference, and the semi-naive evaluator used everywhere else.

Rule bodies are compiled into join plans over integer variable slots. A plan
walks its atoms left to right, using the (predicate, position, value) index
whenever some argument is already bound, and checks each comparison as soon
as all of its variables are bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields

from .core.model import (
    Atom,
    Comparison,
    Fact,
    Variable,
    compare_constants,
    dump_triples,
)
from .errors import EvaluationError

DEFAULT_MAX_FIRINGS = 10_000_000

_ALL, _OLD, _DELTA = 0, 1, 2


class WorkingMemory:
    """Set of ground facts with per-predicate and per-(predicate, position, value) indexes.

    Every fact carries the round (stamp) in which it was asserted. Position
    indexes are built on first request and then maintained; their lists are
    append-only, so stamps along any list are non-decreasing.
    """

    def __init__(self, facts=()):
        self._rel: dict = {}
        self._idx: dict = {}
        self._indexed: dict = {}  # pred -> positions with a live index
        self._size = 0
        for f in facts:
            self.add(f)

    def add(self, fact, stamp: int = 0) -> bool:
        pred, args = fact
        rel = self._rel.get(pred)
        if rel is None:
            rel = self._rel[pred] = {}
        elif args in rel:
            return False
        rel[args] = stamp
        for i in self._indexed.get(pred, ()):
            self._idx[(pred, i)].setdefault(args[i], []).append((args, stamp))
        self._size += 1
        return True

    def add_new(self, pred, candidates, stamp) -> list:
        """Insert every not-yet-present ``args`` of ``pred``; return those inserted."""
        rel = self._rel.get(pred)
        if rel is None:
            rel = self._rel[pred] = {}
        added = [a for a in candidates if a not in rel]
        for a in added:
            rel[a] = stamp
        for i in self._indexed.get(pred, ()):
            idx = self._idx[(pred, i)]
            for a in added:
                bucket = idx.get(a[i])
                if bucket is None:
                    idx[a[i]] = [(a, stamp)]
                else:
                    bucket.append((a, stamp))
        self._size += len(added)
        return added

    def ensure_index(self, pred, position):
        key = (pred, position)
        if key in self._idx:
            return
        idx = self._idx[key] = {}
        for args, stamp in self._rel.get(pred, {}).items():
            idx.setdefault(args[position], []).append((args, stamp))
        self._indexed.setdefault(pred, []).append(position)

    def __contains__(self, fact) -> bool:
        rel = self._rel.get(fact[0])
        return rel is not None and fact[1] in rel

    def __len__(self):
        return self._size

    def __iter__(self):
        for pred, rel in self._rel.items():
            for args in rel:
                yield Fact(pred, args)

    def predicates(self):
        return list(self._rel)

    def facts(self, predicate=None) -> list:
        if predicate is None:
            return list(self)
        return [Fact(predicate, args) for args in self._rel.get(predicate, ())]

    def count(self, predicate) -> int:
        return len(self._rel.get(predicate, ()))

    def lookup(self, predicate, position, value) -> list:
        self.ensure_index(predicate, position)
        return [Fact(predicate, a) for a, _ in self._idx.get((predicate, position), {}).get(value, ())]

    def fact_set(self) -> set:
        return set(self)

    def to_triples(self, include=None) -> str:
        facts = self if include is None else (f for f in self if include(f.predicate))
        return dump_triples(facts)


@dataclass
class EvalStats:
    facts_fetched: int = 0
    facts_derived: int = 0
    rule_firings: int = 0
    iterations: int = 0
    wall_ms: float = 0.0

    COUNTERS = ("facts_fetched", "facts_derived", "rule_firings", "iterations")

    def counters(self) -> dict:
        return {k: getattr(self, k) for k in self.COUNTERS}

    def to_lines(self, with_time=False) -> str:
        items = list(self.counters().items())
        if with_time:
            items.append(("wall_ms", f"{self.wall_ms:.1f}"))
        return "".join(f"{k}\t{v}\n" for k, v in items)

    def __iadd__(self, other):
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self


def eval_comparison(cmp: Comparison, subst) -> bool:
    """Evaluate a comparison under a substitution (variable name -> Constant)."""

    def value(t):
        if isinstance(t, Variable):
            try:
                return subst[t.name]
            except KeyError:
                raise EvaluationError(f"variable ?{t.name} is unbound in {cmp}") from None
        return t

    return compare_constants(value(cmp.left), cmp.op, value(cmp.right))


# -- join plans ------------------------------------------------------------


class _AtomStep:
    __slots__ = ("pred", "filter", "key_pos", "key_src", "member", "checks", "assigns", "arity")

    def __init__(self, pred, arity, filt, key_pos, key_src, member, checks, assigns):
        self.pred = pred
        self.arity = arity
        self.filter = filt
        self.key_pos = key_pos  # index position, or None for a scan
        self.key_src = key_src  # (is_slot, slot_or_constant)
        self.member = member  # all positions known: membership test, args built from sources
        self.checks = checks  # [(pos, is_slot, slot_or_constant)]
        self.assigns = assigns  # [(pos, slot)]


class _CmpStep:
    __slots__ = ("op", "left", "right", "literal")

    def __init__(self, op, left, right, literal):
        self.op = op
        self.left = left
        self.right = right
        self.literal = literal


def _spec(term, slots):
    if isinstance(term, Variable):
        return (True, slots[term.name])
    return (False, term)


class _Body:
    """Slot numbering for one rule body (or query) and the plans built from it."""

    def __init__(self, literals):
        self.literals = tuple(literals)
        self.slots: dict = {}
        for lit in self.literals:
            for v in lit.variables():
                self.slots.setdefault(v.name, len(self.slots))
        self.atoms = [lit for lit in self.literals if isinstance(lit, Atom)]
        self.cmps = [lit for lit in self.literals if isinstance(lit, Comparison)]
        self._plans: dict = {}

    def plan(self, delta_index=None) -> list:
        """Steps with the delta atom (if any) first and other atoms in body order.

        Atoms before the delta atom read only old facts; atoms after it read
        all facts.
        """
        plan = self._plans.get(delta_index)
        if plan is not None:
            return plan
        order = list(range(len(self.atoms)))
        if delta_index is not None:
            order.remove(delta_index)
            order.insert(0, delta_index)
        slots = self.slots
        bound: set = set()
        steps = []
        pending = list(self.cmps)

        def flush():
            nonlocal pending
            keep = []
            for c in pending:
                if all(slots[v.name] in bound for v in c.variables()):
                    steps.append(_CmpStep(c.op, _spec(c.left, slots), _spec(c.right, slots), c))
                else:
                    keep.append(c)
            pending = keep

        flush()
        for i in order:
            atom = self.atoms[i]
            if i == delta_index:
                filt = _DELTA
            elif delta_index is not None and i < delta_index:
                filt = _OLD
            else:
                filt = _ALL
            known = []  # positions whose value is fixed before reading the atom
            for pos, t in enumerate(atom.args):
                if not isinstance(t, Variable) or slots[t.name] in bound:
                    known.append(pos)
            checks, assigns = [], []
            local = set()
            for pos, t in enumerate(atom.args):
                if pos in known:
                    checks.append((pos,) + _spec(t, slots))
                elif slots[t.name] in local:
                    checks.append((pos, True, slots[t.name]))
                else:
                    local.add(slots[t.name])
                    assigns.append((pos, slots[t.name]))
            member = filt != _DELTA and len(known) == atom.arity
            key_pos = key_src = None
            if filt != _DELTA and known and not member:
                key_pos = known[0]
                key_src = _spec(atom.args[key_pos], slots)
                checks = [c for c in checks if c[0] != key_pos]
            steps.append(_AtomStep(atom.predicate, atom.arity, filt, key_pos, key_src, member, checks, assigns))
            bound |= local
            flush()
        if pending:
            raise EvaluationError(f"comparison {pending[0]} has unbound variables")
        self._plans[delta_index] = steps
        return steps


_EMPTY: dict = {}


class _Emitter:
    """Source builder for one compiled plan."""

    def __init__(self):
        self.lines = []
        self.consts = []

    def const(self, value) -> str:
        self.consts.append(value)
        return f"C[{len(self.consts) - 1}]"

    def expr(self, is_slot, src) -> str:
        return f"v{src}" if is_slot else self.const(src)

    def emit(self, depth, line):
        self.lines.append("    " * depth + line)


def _gen_steps(em: _Emitter, steps, depth: int) -> int:
    """Emit nested loops for ``steps``; return the indentation of the innermost body."""
    for st in steps:
        if st.__class__ is _CmpStep:
            left, right = em.expr(*st.left), em.expr(*st.right)
            if st.op == "=":
                em.emit(depth, f"if {left} == {right}:")
            elif st.op == "!=":
                em.emit(depth, f"if {left} != {right}:")
            else:
                em.emit(depth, f"if _cmp({left}, {st.op!r}, {right}):")
            depth += 1
            continue
        pred = em.const(st.pred)
        old = st.filter == _OLD
        if st.member:
            args = [None] * st.arity
            for pos, is_slot, src in st.checks:
                args[pos] = em.expr(is_slot, src)
            em.emit(depth, f"_s = rel_of.get({pred}, _EMPTY).get(({', '.join(args)},))")
            em.emit(depth, "if _s is not None and _s < cutoff:" if old else "if _s is not None:")
            depth += 1
            continue
        if st.filter == _DELTA:
            em.emit(depth, f"for _a in delta.get({pred}, ()):")
            depth += 1
        else:
            if st.key_pos is None:
                source = f"rel_of.get({pred}, _EMPTY).items()"
            else:
                key = em.expr(*st.key_src)
                source = f"idx_of.get(({pred}, {st.key_pos}), _EMPTY).get({key}, ())"
            em.emit(depth, f"for _a, _s in {source}:")
            depth += 1
            if old:
                em.emit(depth, "if _s >= cutoff:")
                em.emit(depth + 1, "break")
        for pos, slot in st.assigns:
            em.emit(depth, f"v{slot} = _a[{pos}]")
        if st.checks:
            cond = " and ".join(f"_a[{pos}] == {em.expr(s, src)}" for pos, s, src in st.checks)
            em.emit(depth, f"if {cond}:")
            depth += 1
    return depth


def _build(em: _Emitter, name: str, params: str):
    src = f"def {name}({params}):\n" + "\n".join(em.lines) + "\n"
    namespace = {"_EMPTY": _EMPTY, "_cmp": compare_constants, "C": tuple(em.consts)}
    exec(compile(src, f"<plan {name}>", "exec"), namespace)
    fn = namespace[name]
    fn.source = src
    return fn


def _compile_rule_plan(steps, head_spec):
    """``f(rel_of, idx_of, delta, cutoff, known, bucket) -> firings``."""
    em = _Emitter()
    em.emit(1, "n = 0")
    depth = _gen_steps(em, steps, 1)
    em.emit(depth, "n += 1")
    em.emit(depth, f"_t = ({''.join(em.expr(s, v) + ', ' for s, v in head_spec)})")
    em.emit(depth, "if _t not in known:")
    em.emit(depth + 1, "bucket[_t] = None")
    em.emit(1, "return n")
    return _build(em, "fire", "rel_of, idx_of, delta, cutoff, known, bucket")


def _compile_query_plan(steps, answer_slots):
    """``f(rel_of, idx_of, out)`` adding answer tuples to ``out``."""
    em = _Emitter()
    em.emit(1, "cutoff = delta = None")
    depth = _gen_steps(em, steps, 1)
    em.emit(depth, f"out.add(({''.join(f'v{s}, ' for s in answer_slots)}))")
    return _build(em, "answer", "rel_of, idx_of, out")


class _CompiledRule:
    def __init__(self, rule):
        self.rule = rule
        self.body = _Body(rule.body)
        head = rule.head
        self.head_pred = head.predicate
        self.head_spec = [_spec(t, self.body.slots) for t in head.args]
        self.body_preds = [a.predicate for a in self.body.atoms]
        self._fns: dict = {}

    def fn(self, delta_index=None):
        fn = self._fns.get(delta_index)
        if fn is None:
            fn = self._fns[delta_index] = _compile_rule_plan(self.body.plan(delta_index), self.head_spec)
        return fn

    def index_keys(self, delta_index=None):
        return _index_keys(self.body.plan(delta_index))


def _index_keys(steps):
    return [(st.pred, st.key_pos) for st in steps if st.__class__ is _AtomStep and st.key_pos is not None]


def _compile(rules) -> list:
    return [_CompiledRule(r) for r in rules]


def _rules_of(program):
    return program.rules if hasattr(program, "rules") else tuple(program)


def _apply(cr: _CompiledRule, wm: WorkingMemory, new: dict, stats, delta_index, cutoff, delta, cap):
    """Fire ``cr`` once over ``wm``, collecting unseen head facts into ``new``."""
    pred = cr.head_pred
    bucket = new.get(pred)
    if bucket is None:
        bucket = new[pred] = {}
    for key in cr.index_keys(delta_index):
        wm.ensure_index(*key)
    try:
        n = cr.fn(delta_index)(wm._rel, wm._idx, delta, cutoff, wm._rel.get(pred, _EMPTY), bucket)
    except EvaluationError as e:
        raise EvaluationError(f"{e} (in rule: {cr.rule})") from None
    stats.rule_firings += n
    if stats.rule_firings > cap:
        raise EvaluationError(f"firing cap of {cap} exceeded")


def _commit(wm, new: dict, stamp, stats, fetch_hook, triggers) -> dict:
    """Assert buffered facts, run the fetch hook on new trigger facts.

    Returns the facts inserted this round, grouped by predicate.
    """
    delta: dict = {}
    queue = []
    for pred, argsd in new.items():
        if not argsd:
            continue
        added = wm.add_new(pred, argsd, stamp)
        if added:
            stats.facts_derived += len(added)
            delta[pred] = added
            if fetch_hook is not None and pred in triggers:
                queue.extend(Fact(pred, a) for a in added)
    _drain(wm, queue, stamp, stats, fetch_hook, triggers, delta)
    return delta


def _drain(wm, queue, stamp, stats, fetch_hook, triggers, delta):
    while queue:
        fact = queue.pop(0)
        for f in fetch_hook(fact) or ():
            f = Fact(f[0], tuple(f[1]))
            if wm.add(f, stamp):
                stats.facts_fetched += 1
                delta.setdefault(f.predicate, []).append(f.args)
                if f.predicate in triggers:
                    queue.append(f)


def _prime(wm, stats, fetch_hook, triggers):
    if fetch_hook is None:
        return
    queue = [f for f in wm if f.predicate in triggers]
    _drain(wm, queue, 0, stats, fetch_hook, triggers, {})


def naive_evaluate(program, facts, max_firings: int = DEFAULT_MAX_FIRINGS):
    """Least fixpoint by repeated full rule application (reference oracle)."""
    wm = WorkingMemory(facts)
    stats = run_naive(program, wm, max_firings=max_firings)
    return wm.fact_set(), stats


def run_naive(program, wm: WorkingMemory, max_firings=DEFAULT_MAX_FIRINGS) -> EvalStats:
    t0 = time.perf_counter()
    compiled = _compile(_rules_of(program))
    stats = EvalStats()
    while True:
        stats.iterations += 1
        new: dict = {}
        for cr in compiled:
            _apply(cr, wm, new, stats, None, 0, None, max_firings)
        if not _commit(wm, new, stats.iterations, stats, None, ()):
            break
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return stats


def seminaive_evaluate(program, facts, fetch_hook=None, triggers=(), max_firings: int = DEFAULT_MAX_FIRINGS):
    """Semi-naive least fixpoint.

    ``fetch_hook(fact)`` is called for every new fact (initial facts included)
    whose predicate is in ``triggers``; the facts it returns are asserted and
    counted as fetched rather than derived.
    """
    wm = WorkingMemory(facts)
    stats = run_seminaive(program, wm, fetch_hook, triggers, max_firings)
    return wm.fact_set(), stats


def run_seminaive(program, wm: WorkingMemory, fetch_hook=None, triggers=(), max_firings=DEFAULT_MAX_FIRINGS) -> EvalStats:
    """Evaluate in place over ``wm`` and return the statistics."""
    t0 = time.perf_counter()
    triggers = frozenset(triggers)
    compiled = _compile(_rules_of(program))
    stats = EvalStats()
    _prime(wm, stats, fetch_hook, triggers)

    # first round: every rule against everything
    stats.iterations = 1
    new: dict = {}
    for cr in compiled:
        _apply(cr, wm, new, stats, None, 0, None, max_firings)
    delta = _commit(wm, new, 1, stats, fetch_hook, triggers)

    while delta:
        stats.iterations += 1
        stamp = stats.iterations
        cutoff = stamp - 1
        new = {}
        for cr in compiled:
            for i, p in enumerate(cr.body_preds):
                if p in delta:
                    _apply(cr, wm, new, stats, i, cutoff, delta, max_firings)
        delta = _commit(wm, new, stamp, stats, fetch_hook, triggers)
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return stats


def match_literals(literals, answer_vars, wm: WorkingMemory) -> set:
    """All distinct bindings of ``answer_vars`` satisfying the conjunction over ``wm``."""
    body = _Body(literals)
    steps = body.plan()
    for key in _index_keys(steps):
        wm.ensure_index(*key)
    fn = _compile_query_plan(steps, [body.slots[v] for v in answer_vars])
    out: set = set()
    fn(wm._rel, wm._idx, out)
    return out


__all__ = [
    "DEFAULT_MAX_FIRINGS",
    "EvalStats",
    "WorkingMemory",
    "eval_comparison",
    "match_literals",
    "naive_evaluate",
    "run_naive",
    "run_seminaive",
    "seminaive_evaluate",
]
