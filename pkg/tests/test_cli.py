import subprocess
import sys

import pytest

UNSAFE_RULES = [
    "p(?x,?y) :- q(?x).",
    "r(?x) :- q(?x), ?z > 5.",
    "r(?x) :- q(?y).",
    "r(?x) :- ?x > 1, q(?y).",
    "r(?x,?x) :- q(?y).",
    "r(?x) :- q(?x), ?y = ?z.",
    "r(?x) :- q(?x), ?x < ?w.",
    "A(?x), B(?y) :- q(?x).",
    "r(?x,?y) :- s(?x,a), ?y != b.",
    "r(?x) :- q(a), s(b,?y).",
    "r(c,?v) :- q(?x).",
    "r(?x) :- q(?x), t(?x,?y), ?k >= ?y.",
]


def test_check_ok(rqa, crimes):
    code, out, err = rqa("check", *crimes.flags())
    assert (code, out) == (0, "OK\n")


def test_check_rules_only(rqa, crimes):
    assert rqa("check", "--rules", crimes.rules)[:2] == (0, "OK\n")


def test_check_reports_coverage_warnings(rqa, crimes, tmp_path):
    rules = tmp_path / "rules.dl"
    rules.write_text(crimes.rules.read_text() + "Suspect(?p) :- Watchlisted(?p).\n")
    code, out, err = rqa("check", "--rules", rules, "--mappings", crimes.mappings, "--catalog", crimes.catalog)
    assert (code, out) == (0, "OK\n")
    assert "warning: essential predicate Watchlisted has no mapping" in err


@pytest.mark.parametrize("rule", UNSAFE_RULES)
def test_unsafe_rules_exit_3(rqa, tmp_path, rule):
    path = tmp_path / "bad.dl"
    path.write_text(rule + "\n")
    code, out, err = rqa("check", "--rules", path)
    assert code == 3 and out == ""
    assert "variable ?" in err


def test_safety_message_names_the_variable(rqa, tmp_path):
    path = tmp_path / "bad.dl"
    path.write_text("p(?x,?y) :- q(?x).\n")
    _, _, err = rqa("check", "--rules", path)
    assert err == "error: rule 0 (line 1): variable ?y in head is not bound by a positive body atom: p(?x,?y) :- q(?x).\n"


def test_missing_csv_exit_4(rqa, crimes, tmp_path):
    cat = tmp_path / "catalog.txt"
    cat.write_text("table t file gone.csv columns a:int\n")
    code, _, err = rqa("check", "--rules", crimes.rules, "--catalog", cat)
    assert code == 4 and "gone.csv" in err


def test_bad_cell_exit_4(rqa, crimes, tmp_path):
    (tmp_path / "t.csv").write_text("a\nnot-a-number\n")
    cat = tmp_path / "catalog.txt"
    cat.write_text("table t file t.csv columns a:int\n")
    code, _, err = rqa("check", "--rules", crimes.rules, "--catalog", cat)
    assert code == 4 and "row 2" in err


def test_parse_error_exit_2(rqa, tmp_path):
    path = tmp_path / "bad.dl"
    path.write_text("p(?x) :- q(?x) r(?x).\n")
    code, _, err = rqa("check", "--rules", path)
    assert code == 2 and "line 1, column 16" in err


def test_arity_error_exit_2(rqa, tmp_path):
    path = tmp_path / "bad.dl"
    path.write_text("p(?x) :- q(?x,?y,?z).\n")
    assert rqa("check", "--rules", path)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["check"],
        ["query", "--rules", "/nonexistent/rules.dl", "p(?x)"],
        ["gen", "--scenario", "chain"],
        ["gen", "--scenario", "chain", "--size", "0", "--out", "x"],
        ["bench", "--scenario", "chain", "--mode", "sideways"],
    ],
)
def test_usage_errors_exit_1(rqa, argv):
    assert rqa(*argv)[0] == 1


def test_mappings_need_catalog(rqa, crimes):
    code, _, err = rqa("query", "--rules", crimes.rules, "--mappings", crimes.mappings, "Perpetrator(?p)")
    assert code == 1 and "--catalog" in err


def test_help(rqa):
    code, out, _ = rqa("--help")
    assert code == 0 and "query" in out


@pytest.mark.parametrize("mode", ["forward", "magic", "hybrid"])
def test_query_crimes(rqa, crimes, mode):
    assert rqa("query", *crimes.flags(), "--mode", mode, "Perpetrator(?p)") == (0, "?p\np1\n", "")


def test_query_persons_forward(rqa, persons):
    code, out, _ = rqa("query", *persons.flags(), "--mode", "forward", "Man(?x), hasAge(?x,?a), ?a > 21")
    assert (code, out) == (0, "?x\t?a\n2\t45\n")


def test_empty_result_prints_header_only(rqa, crimes):
    assert rqa("query", *crimes.flags(), "Perpetrator(p3)")[:2] == (0, "\n")
    assert rqa("query", *crimes.flags(), "Beneficiary(?p), Director(?p)")[:2] == (0, "?p\n")


def test_query_stats_and_explain(rqa, crimes):
    code, out, err = rqa("query", *crimes.flags(), "--mode", "magic", "--stats", "--explain", "sanctionedBy(?p,?a)")
    assert code == 0
    head, stats = out.split("\n\n")
    assert head == "?p\t?a\np1\tart296"
    assert [line.split("\t")[0] for line in stats.splitlines()] == [
        "facts_fetched", "facts_derived", "rule_firings", "iterations",
    ]
    assert err.startswith("% rules\n") and "sanctionedBy$ff" in err
    assert "wall_ms" in err and "wall_ms" not in out


def test_query_unknown_predicate_exit_2(rqa, crimes):
    assert rqa("query", *crimes.flags(), "Smuggler(?p)")[0] == 2


def test_query_unsafe_exit_3(rqa, crimes):
    assert rqa("query", *crimes.flags(), "Perpetrator(?p), ?q > 1")[0] == 3


def test_query_mapping_gap_exit_5(rqa, crimes, tmp_path):
    rules = tmp_path / "rules.dl"
    rules.write_text("Suspect(?p) :- Watchlisted(?p).\n")
    code, _, err = rqa("query", "--rules", rules, "--mappings", crimes.mappings, "--catalog", crimes.catalog, "Suspect(?p)")
    assert code == 5 and "Watchlisted" in err


def test_query_type_error_exit_4(rqa, crimes):
    assert rqa("query", *crimes.flags(), "hasAmount(?t,?a), ?a > big")[0] == 4


def test_gen_writes_loadable_files(rqa, tmp_path):
    code, out, _ = rqa("gen", "--scenario", "multichain", "--size", "3", "--k", "2", "--out", tmp_path / "mc")
    assert code == 0 and out.strip().endswith("catalog.txt")
    assert (tmp_path / "mc" / "par.csv").read_text() == "src,dst\na0,a1\na1,a2\na2,a3\nb0,b1\nb1,b2\nb2,b3\n"
    rules, maps, cat = (tmp_path / "mc" / n for n in ("rules.dl", "mappings.map", "catalog.txt"))
    code, out, _ = rqa("query", "--rules", rules, "--mappings", maps, "--catalog", cat, "anc(b1,?y)")
    assert out == "?y\nb2\nb3\n"


def test_bench_chain_one(rqa):
    code, out, err = rqa("bench", "--scenario", "chain", "--size", "1", "--mode", "forward")
    assert code == 0
    assert out == (
        "scenario\tmode\tfacts_fetched\tfacts_derived\trule_firings\titerations\tanswers\n"
        "chain\tforward\t1\t1\t1\t2\t1\n"
    )
    assert "wall_ms" in err


def test_bench_rows_follow_argument_order(rqa):
    code, out, _ = rqa("bench", "--scenario", "crimes", "--scenario", "chain", "--size", "2")
    rows = [line.split("\t")[:2] for line in out.splitlines()[1:]]
    assert rows == [[s, m] for s in ("crimes", "chain") for m in ("forward", "magic", "hybrid")]


def test_console_script_entry_point(crimes):
    proc = subprocess.run(
        [sys.executable, "-m", "rqa.cli", "query", *crimes.flags(), "sanctionedBy(?p,?a)"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "?p\t?a\np1\tart296\n"
