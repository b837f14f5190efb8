import random

import pytest
from hypothesis import given, settings, strategies as st

from graphprog.graph import Graph, isomorphic
from graphprog.rules import (
    MatchCandidate, RuleError, apply, derive, find_matches, instantiate, invert,
)
from graphprog.syntax import parse_graph, parse_rules
from graphprog.transform import dang
from graphprog.econd import TrueC

import bruteforce as bf

TRIANGLE = parse_graph("{ node 1 1:0; node 2 2; node 3 3; edge 1 -- 2; edge 2 -- 3; edge 1 -- 3; }")


def test_instantiate_init(env):
    ri = instantiate(env["init"], {"x": 5})
    assert ri.lhs.nodes == {1: (5,)} and ri.rhs.nodes == {1: (5, 0)}
    assert ri.interface.nodes == {1: None}


def test_instantiate_undefined_division():
    (r,) = parse_rules("rule half(x) { lhs { node 1 x; } rhs { node 1 7/x; } }").values()
    assert instantiate(r, {"x": 0}) is None
    assert instantiate(r, {"x": 7}).rhs.nodes[1] == (1,)


def test_instantiate_colour_with_eights(env):
    ri = instantiate(env["colour"], {"x": 8, "y": 8, "i": 0})
    assert ri.lhs.nodes == {1: (8, 0), 2: (8,)}
    assert ri.rhs.nodes == {1: (8, 0), 2: (8, 1)}


def test_instantiate_requires_lhs_variables(env):
    with pytest.raises(RuleError):
        instantiate(env["colour"], {"x": 1})


def test_init_does_not_match_a_two_item_label(env):
    assert find_matches(env["init"], parse_graph("{ node 1 1:2; }")) == []


def test_init_matches_each_node(env):
    assert len(find_matches(env["init"], parse_graph("{ node 1 1; node 2 2; }"))) == 2


def test_colour_on_triangle_matches_agree_with_brute_force(env):
    got = find_matches(env["colour"], TRIANGLE)
    want = bf.rule_matches(env["colour"], TRIANGLE)
    assert len(got) == len(want) == 2
    assert {m.match.nodes[2] for m in got} == {2, 3}


def test_dangling_condition_blocks_delete(env):
    G = parse_graph("{ node 1 1; node 2 2; edge 1 -> 2; }")
    assert find_matches(env["delete"], G) == []
    assert len(find_matches(env["delete"], parse_graph("{ node 1 1; node 2 2; }"))) == 2


def test_apply_init(env):
    G = Graph({5: (5,)})
    (m,) = find_matches(env["init"], G)
    H, h = apply(env["init"], G, m)
    assert H.nodes == {5: (5, 0)}
    h.check()


def test_apply_identity_schema():
    (r,) = parse_rules("rule same(x) { lhs { node 1 x; } rhs { node 1 x; } }").values()
    G = parse_graph("{ node 1 3; node 2 4; edge 1 -> 2; }")
    for m in find_matches(r, G):
        assert isomorphic(apply(r, G, m)[0], G)


def test_apply_colour_increments_neighbour(env):
    G = parse_graph("{ node 1 1:0; node 2 2; edge 1 -- 2; }")
    (m,) = find_matches(env["colour"], G)
    H, _ = apply(env["colour"], G, m)
    assert H.nodes == {1: (1, 0), 2: (2, 1)}
    assert sorted(H.edges.values()) == [(1, 2), (2, 1)]


def test_apply_rejects_dangling_match(env):
    G = parse_graph("{ node 1 1; node 2 2; edge 1 -> 2; }")
    from graphprog.graph import Morphism
    m = MatchCandidate({"x": 1}, Morphism(Graph({1: (1,)}), G, {1: 1}, {}))
    with pytest.raises(RuleError):
        apply(env["delete"], G, m)


def test_invert_is_an_involution(env):
    for r in env.values():
        assert invert(invert(r)) == r


def test_invert_init(env):
    inv = invert(env["init"])
    assert inv.lhs.nodes == {1: (env["init"].rhs.nodes[1])}
    assert str(inv.lhs.nodes[1][0]) == "x" and inv.rhs.nodes[1] == env["init"].lhs.nodes[1]


def test_inverse_of_creating_rule_deletes(env):
    inv = invert(env["add"])
    assert inv.deleted_nodes() == [1]
    assert not isinstance(dang(inv), TrueC)


def test_rhs_variables_must_occur_on_lhs():
    with pytest.raises(ValueError, match="right-hand variables"):
        parse_rules("rule bad(x) { lhs { node 1 1; } rhs { node 1 x; } }")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["init", "colour", "delete", "edge_add", "loop_add"]))
def test_matches_agree_with_brute_force_on_random_graphs(env, seed, name):
    rng = random.Random(seed)
    labels = [(0,), (1,), (0, 0), (0, 1), (1, 1)]
    n = rng.randint(0, 3)
    nodes = {v: rng.choice(labels) for v in range(n)}
    edges = {}
    for s in range(n):
        for t in range(n):
            if rng.random() < 0.3:
                edges[len(edges)] = (s, t)
    G = Graph(nodes, edges)
    r = env[name]
    got = {(tuple(sorted(m.interp.items())), tuple(sorted(m.match.nodes.items())),
            tuple(sorted(m.match.edges.items()))) for m in find_matches(r, G)}
    assert got == bf.rule_matches(r, G)
    for H, h, m in derive(r, G):
        h.check()
        assert len(H.nodes) == n - len(r.deleted_nodes()) + len(r.created_nodes())
