import random

import pytest
from hypothesis import given, settings, strategies as st

from graphprog.econd import ExistsMorph, Not, alpha_equal, format_condition, holds
from graphprog.graph import Graph
from graphprog.oracle import random_condition, random_graph
from graphprog.rules import format_rule
from graphprog.syntax import (
    ParseError, Workspace, builtin_rules, parse_condition, parse_graph, parse_rules,
)


def test_rule_with_relabelled_and_created_nodes():
    (r,) = parse_rules("""
        rule grow(x) {
          lhs { node 1 x; node 2 x:1; edge 1 -> 2; }
          rhs { node 1 x:0; node 3 7; edge 1 -> 3; }
        }""").values()
    assert r.preserved == (1,)
    assert r.deleted_nodes() == [2] and len(r.created_nodes()) == 1
    assert r.created_nodes()[0] not in r.lhs.nodes


def test_rule_printing_parses_back(env):
    for r in env.values():
        (again,) = parse_rules(format_rule(r)).values()
        assert again == r


def test_graph_printing_parses_back():
    G = parse_graph("graph g { node 1 1:-2; node 4 0; edge 1 -- 4; edge 4 -> 4; }")
    assert parse_graph(G.format()) == G


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_condition_printing_round_trips(seed):
    rng = random.Random(seed)
    c = random_condition(rng, depth=3)
    again = parse_condition(format_condition(c))
    assert alpha_equal(again, c)


def test_universal_graph_quantifier():
    c = parse_condition("all { node 1 0; } . ex { node 1 0; node 2 1; edge 1 -> 2; }")
    assert isinstance(c, Not) and isinstance(c.body, ExistsMorph)
    assert holds(Graph(), c)
    assert not holds(Graph({0: (0,)}), c)


def test_named_graphs_extend_each_other():
    ws = Workspace().load_text("""
        define two = ex p { node 1 0; } . ex q { node 2 1; edge 1 -> 2; } extends p;
    """)
    assert holds(parse_graph("{ node 1 0; node 2 1; edge 1 -> 2; }"), ws.defs["two"])


def test_defined_conditions_embed_in_context():
    ws = Workspace().load_text("""
        define has_one = ex { node 1 1; };
        define outer = ex { node 1 0; } . has_one;
    """)
    assert holds(parse_graph("{ node 1 0; node 2 1; }"), ws.defs["outer"])
    assert not holds(parse_graph("{ node 1 0; }"), ws.defs["outer"])


def test_use_is_relative_and_loaded_once(tmp_path):
    (tmp_path / "a.grs").write_text("rule r() { lhs { } rhs { } }\n")
    (tmp_path / "b.cond").write_text('use "a.grs"; use "a.grs"; define t = app(r);\n')
    ws = Workspace().load(str(tmp_path / "b.cond"))
    assert "r" in ws.rules and "t" in ws.defs


@pytest.mark.parametrize("text,line", [
    ("rule r(x) {\n lhs { node 1 x; }\n rhs { node 1 x; node 1 x; }\n}", 3),
    ("rule r(x) {\n lhs { node 1 x; edge 1 -> 2; }\n rhs { }\n}", 2),
    ("rule r() {\n lhs { node 1; }\n rhs { }\n}", 2),
])
def test_rule_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_rules(text)
    assert info.value.line == line


def test_undefined_names():
    with pytest.raises(ParseError):
        parse_condition("nosuch and true")
    with pytest.raises(ParseError):
        parse_condition("ex q { node 1 0; } extends nope")


def test_builtin_rules():
    env = builtin_rules()
    assert {"init", "colour", "delete", "edge_add", "loop_add", "add", "nop"} <= set(env)
    assert sorted(env["colour"].rhs.edges.values()) == [(1, 2), (2, 1)]


def test_negative_constants_in_labels():
    G = parse_graph("{ node 1 -1:-(2); }")
    assert G.nodes[1] == (-1, -2)
