"""Rule/query representation, parsing and static analysis."""

from .analysis import (
    Violation,
    check_safety,
    dependency_graph,
    edges,
    hoist_comparisons,
    relevant_closure,
)
from .model import (
    ISA,
    Atom,
    Comparison,
    Constant,
    Fact,
    Program,
    Query,
    Rule,
    Variable,
    compare_constants,
    dump_triples,
    render_constant,
)
from .parser import (
    lloyd_topor_split,
    parse_constant,
    parse_program,
    parse_query,
    parse_statements,
    parse_triples,
)

__all__ = [
    "ISA",
    "Atom",
    "Comparison",
    "Constant",
    "Fact",
    "Program",
    "Query",
    "Rule",
    "Variable",
    "Violation",
    "check_safety",
    "compare_constants",
    "dependency_graph",
    "dump_triples",
    "edges",
    "hoist_comparisons",
    "lloyd_topor_split",
    "parse_constant",
    "parse_program",
    "parse_query",
    "parse_statements",
    "parse_triples",
    "relevant_closure",
    "render_constant",
]
