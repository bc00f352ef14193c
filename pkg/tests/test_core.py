from decimal import Decimal

import pytest

from rqa.core import (
    Atom,
    Comparison,
    Constant,
    Fact,
    Variable,
    check_safety,
    compare_constants,
    dependency_graph,
    dump_triples,
    edges,
    hoist_comparisons,
    lloyd_topor_split,
    parse_constant,
    parse_program,
    parse_query,
    parse_statements,
    parse_triples,
    relevant_closure,
    render_constant,
)
from rqa.errors import ArityError, EvaluationError, ParseError, SafetyError

HIERARCHY = "Woman(?x) :- Mother(?x).\nPerson(?x) :- Woman(?x).\n"
ANCESTOR = "anc(?x,?y) :- par(?x,?y).\nanc(?x,?z) :- par(?x,?y), anc(?y,?z).\n"


# -- constants and facts ---------------------------------------------------


def test_integer_and_decimal_compare_numerically():
    assert Constant.integer(3) == Constant.decimal("3.0")
    assert hash(Constant.integer(3)) == hash(Constant.decimal("3.00"))
    assert compare_constants(Constant.integer(2), "<", Constant.decimal("2.5"))


def test_symbol_and_text_are_different_values():
    assert Constant.symbol("Male") != Constant.text("Male")
    assert compare_constants(Constant.symbol("a"), "!=", Constant.text("a"))


def test_ordering_across_kinds_raises():
    with pytest.raises(EvaluationError, match="cannot order"):
        compare_constants(Constant.symbol("a"), "<", Constant.integer(1))


@pytest.mark.parametrize(
    "c, text",
    [
        (Constant.symbol("art296"), "art296"),
        (Constant.integer(-4), "-4"),
        (Constant.decimal(Decimal("50000.00")), "50000.00"),
        (Constant.decimal(Decimal("7")), "7.0"),
        (Constant.text("O'Brien"), "'O''Brien'"),
    ],
)
def test_render_and_parse_constant(c, text):
    assert render_constant(c) == text
    back = parse_constant(text)
    assert back == c and back.type_name == c.type_name


def test_fact_triples():
    unary = Fact("Person", (Constant.symbol("mary"),))
    binary = Fact("hasAge", (Constant.integer(2), Constant.integer(45)))
    assert unary.to_triple() == (Constant.symbol("mary"), "isa", "Person")
    assert binary.to_triple() == (Constant.integer(2), "hasAge", Constant.integer(45))
    text = dump_triples([binary, unary])
    assert text == "2\thasAge\t45\nmary\tisa\tPerson\n"
    assert parse_triples(text) == {unary, binary}


def test_fact_equals_plain_tuple():
    f = Fact("p", (Constant.integer(1),))
    assert f == ("p", (Constant.integer(1),))
    assert str(f) == "p(1)"


# -- parsing -----------------------------------------------------------------


def test_hierarchy_rule():
    prog = parse_program("Person(?x) :- Woman(?x).")
    assert len(prog.rules) == 1
    assert prog.arities == {"Person": 1, "Woman": 1}
    assert prog.derived == {"Person"}
    assert prog.essential == {"Woman"}


def test_empty_program():
    prog = parse_program("")
    assert prog.rules == () and prog.arities == {}


def test_comments_and_facts():
    prog = parse_program("% a comment\nMother(mary).  % trailing\nWoman(?x) :- Mother(?x).\n")
    assert [str(r) for r in prog.rules] == ["Mother(mary).", "Woman(?x) :- Mother(?x)."]


def test_lloyd_topor_split():
    (raw,) = parse_statements("A(?x), B(?x) :- C(?x).")
    assert [str(r) for r in lloyd_topor_split(raw)] == ["A(?x) :- C(?x).", "B(?x) :- C(?x)."]
    (three,) = parse_statements("A(?x), B(?x), D(?x) :- C(?x), E(?x).")
    split = lloyd_topor_split(three)
    assert len(split) == 3 and all(r.body == three.body for r in split)
    (single,) = parse_statements("A(?x) :- C(?x).")
    assert lloyd_topor_split(single) == [single]


def test_split_program_is_safety_checked_per_conjunct():
    with pytest.raises(SafetyError) as e:
        parse_program("A(?x), B(?y) :- C(?x).")
    assert [v.variable for v in e.value.violations] == ["y"]


def test_ternary_atom_is_an_arity_error_with_position():
    with pytest.raises(ArityError) as e:
        parse_program("p(?x) :- q(?x,?y,?z).")
    assert (e.value.line, e.value.column) == (1, 10)


def test_arity_conflict():
    with pytest.raises(ArityError, match="arity 2 but elsewhere with arity 1"):
        parse_program("p(?x) :- q(?x).\nr(?x) :- q(?x,?x).")


@pytest.mark.parametrize("text", ["isa(?x) :- q(?x).", "p$b(?x) :- q(?x)."])
def test_reserved_predicate_names(text):
    with pytest.raises(ParseError):
        parse_program(text)


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("p(?x) :- q(?x)", 1, 15),
        ("p(?x) :- q(?x).\np(?x) :- .", 2, 10),
        ("p(?x) :- q(?x), ?x >.", 1, 21),
        ("p(?x) :- q(?x) ; r(?x).", 1, 16),
    ],
)
def test_parse_error_positions(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_program(text)
    assert (e.value.line, e.value.column) == (line, col)
    assert str(e.value).startswith(f"line {line}, column {col}:")


def test_text_constants_with_quotes():
    prog = parse_program("p(?x) :- q(?x, 'it''s').")
    assert prog.rules[0].body[0].args[1] == Constant.text("it's")


def test_query_parts():
    q = parse_query("Adult(?x), hasAge(?x,?a), ?a > 21")
    assert len(q.atoms) == 2 and len(q.comparisons) == 1
    assert q.answer_vars == ("x", "a")
    assert parse_query("Person(?x)").answer_vars == ("x",)


def test_query_without_atoms_is_unsafe():
    with pytest.raises(SafetyError, match="at least one atom"):
        parse_query("?a > 21")


def test_query_checks_known_predicates():
    prog = parse_program(HIERARCHY)
    with pytest.raises(ParseError, match="unknown predicate"):
        parse_query("Man(?x)", prog)
    with pytest.raises(ArityError):
        parse_query("Person(?x,?y)", prog)


# -- safety and dependencies -------------------------------------------------


def test_safe_rule_with_comparison():
    (rule,) = parse_statements("Adult(?x) :- Person(?x), hasAge(?x,?a), ?a > 21.")
    assert check_safety(rule) == []


def test_unbound_head_variable():
    (rule,) = parse_statements("p(?x,?y) :- q(?x).")
    (v,) = check_safety(rule, 4)
    assert v.variable == "y"
    assert str(v) == "rule 4 (line 1): variable ?y in head is not bound by a positive body atom: p(?x,?y) :- q(?x)."


def test_comparison_only_variable():
    (rule,) = parse_statements("r(?x) :- q(?x), ?z > 5.")
    (v,) = check_safety(rule)
    assert v.variable == "z" and v.reason == "occurs only in a comparison"


def test_safety_error_collects_all_violations():
    with pytest.raises(SafetyError) as e:
        parse_program("p(?x,?y) :- q(?x).\nr(?x) :- q(?x), ?z > 5.\n")
    assert [(v.rule_index, v.variable) for v in e.value.violations] == [(0, "y"), (1, "z")]


def test_dependency_graph():
    hier = parse_program(HIERARCHY)
    assert set(edges(dependency_graph(hier))) == {("Person", "Woman"), ("Woman", "Mother")}
    assert dependency_graph(parse_program("")) == {}
    anc = parse_program(ANCESTOR)
    assert set(edges(dependency_graph(anc))) == {("anc", "par"), ("anc", "anc")}


def test_relevant_closure():
    hier = parse_program(HIERARCHY)
    assert relevant_closure(parse_query("Person(?x)"), hier) == {"Person", "Woman", "Mother"}
    assert relevant_closure(parse_query("Mother(?x)"), hier) == {"Mother"}
    anc = parse_program(ANCESTOR)
    assert relevant_closure(parse_query("anc(a,?y)"), anc) == {"anc", "par"}


def test_hoist_comparisons():
    x, a = Variable("x"), Variable("a")
    cmp = Comparison(a, ">", Constant.integer(21))
    body = [cmp, Atom("Person", (x,)), Atom("hasAge", (x, a)), Atom("q", (x,))]
    assert hoist_comparisons(body) == [body[1], body[2], cmp, body[3]]


def test_triples_with_tabs_and_form_feeds_inside_text():
    f = Fact("note", (Constant.symbol("a"), Constant.text("x\ty\x0cz")))
    assert parse_triples(dump_triples([f])) == {f}
    with pytest.raises(ParseError, match="three"):
        parse_triples("a\tb\n")
