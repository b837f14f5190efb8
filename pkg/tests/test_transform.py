import random

from hypothesis import given, settings, strategies as st

from graphprog.econd import (
    FALSE, TRUE, And, ExistsInt, ExistsMorph, Not, Or, alpha_equal, holds,
)
from graphprog.oracle import Universe, difftest_app, difftest_wpost, enumerate_graphs, random_condition, random_graph
from graphprog.rules import derive, find_matches, invert
from graphprog.syntax import parse_condition
from graphprog.transform import app, dang, freshen, right, shift, wpost

import bruteforce as bf

SMALL = Universe(2, ((0,), (1,), (0, 0), (1, 0)), 1)


def _graphs_in(c):
    out = []

    def walk(x):
        if isinstance(x, ExistsMorph):
            out.append(x.graph)
            walk(x.body)
        elif isinstance(x, (ExistsInt, Not)):
            walk(x.body)
        elif isinstance(x, (And, Or)):
            for i in x.items:
                walk(i)

    walk(c)
    return out


def _cands(G):
    return sorted({i for lab in G.nodes.values() for i in lab} | set(range(-2, 4)))


def test_freshen_replaces_constants():
    got = freshen(parse_condition("ex { node 1 5; }"))
    assert isinstance(got, ExistsInt)
    (g,) = _graphs_in(got)
    assert g.nodes[1] == (got.body.graph.nodes[1][0],)
    assert str(got.body.graph.nodes[1][0]) == got.var
    for G in enumerate_graphs(SMALL):
        assert holds(G, got) == holds(G, parse_condition("ex { node 1 5; }"))


def test_freshen_leaves_disjoint_conditions_alone(env):
    c = parse_condition("ex int a . ex { node 1 a; }")
    assert freshen(c, env["init"]) == c


def test_freshen_renames_rule_variables(env):
    c = parse_condition("ex int x . ex { node 1 x:1; } . not (ex int y . ex { node 2 y; })")
    got = freshen(c, env["colour"])
    assert got.var not in env["colour"].vars
    for G in enumerate_graphs(SMALL):
        assert holds(G, got) == holds(G, c)


def test_dang_of_non_deleting_rules(env):
    assert dang(env["init"]) == TRUE
    assert dang(invert(env["init"])) == TRUE


def test_dang_of_delete(env):
    d = dang(env["delete"])
    assert isinstance(d, And) and len(d.items) == 3
    shapes = sorted((len(g.nodes), sorted(g.edges.values())) for g in map(lambda n: n.body.graph, d.items))
    assert shapes == [(1, [(1, 1)]), (2, [(1, 2)]), (2, [(2, 1)])]


def test_dang_conjuncts_are_exactly_the_dangling_extensions(env):
    # each forbidden extension really blocks the deleting rule
    for r in (env["delete"], invert(env["add"]), invert(env["init"])):
        d = dang(r)
        for n in (d.items if isinstance(d, And) else ()):
            G = n.body.graph
            concrete = G.__class__({v: (0,) for v in G.nodes}, G.edges)
            assert not find_matches(r, concrete) or not all(
                set(m.match.nodes.values()) >= set(concrete.nodes) for m in find_matches(r, concrete))


def test_app_rows(env):
    assert app([]) == FALSE
    assert alpha_equal(app([env["init"]]), parse_condition("ex int x . ex { node 1 x; }"))
    assert alpha_equal(app([env["colour"]]),
                       parse_condition("ex int x, i, y . ex { node 1 x:i; node 2 y; edge 1 -- 2; }"))


def test_app_difftest_small(env):
    rep = difftest_app([[env[n]] for n in ("init", "colour", "delete")] + [[env["delete"], env["init"]]], SMALL)
    assert rep.checked and rep.ok, rep.violations[:3]


def test_shift_of_c(env, conds):
    s = shift(env["init"], freshen(conds.defs["c"], env["init"]))
    assert isinstance(s, Or) and len(s.items) == 2
    merged, apart = sorted(s.items, key=lambda x: isinstance(x, ExistsInt))
    # the identified disjunct: a is the match node, so only the negation remains
    assert isinstance(merged, Not)
    assert [sorted(g.nodes) for g in _graphs_in(merged)] == [[1, 2]]
    assert isinstance(apart, ExistsInt)
    assert len(apart.body.graph.nodes) == 2


def test_base_cases(env):
    for r in env.values():
        assert shift(r, TRUE) == TRUE
        assert right(r, TRUE) == TRUE


def test_right_relabels_match_node(env, conds):
    r = env["init"]
    rc = right(r, shift(r, freshen(conds.defs["c"], r)))
    graphs = _graphs_in(rc)
    assert graphs
    for g in graphs:
        assert [str(i) for i in g.nodes[1]] == ["x", "0"]


def test_wpost_rows(env, conds):
    assert wpost([], TRUE) == FALSE
    assert wpost([], conds.defs["c"]) == FALSE
    assert alpha_equal(wpost([env["init"]], TRUE), parse_condition("ex int x . ex { node 1 x:0; }"))
    got = wpost([env["init"]], conds.defs["c"])
    for G in enumerate_graphs(Universe(3, ((0,), (0, 0), (1, 0)), 1)):
        assert holds(G, got) == holds(G, conds.defs["wpost_init_c"])


def test_wpost_difftest_small(env, conds):
    cases = [([env["init"]], TRUE), ([env["init"]], conds.defs["c"]), ([env["add"]], TRUE),
             ([env["delete"]], TRUE), ([env["colour"]], TRUE)]
    rep = difftest_wpost(cases, Universe(2, ((0,), (0, 0), (0, 1)), 1))
    assert rep.checked and rep.ok, rep.violations[:3]


_rule_names = st.sampled_from(["init", "colour", "delete", "edge_add", "loop_add", "add"])


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 100_000), _rule_names)
def test_shift_matches_naive_satisfaction(env, seed, name):
    rng = random.Random(seed)
    r = env[name]
    G = random_graph(rng, max_nodes=3, labels=((0,), (1,), (0, 0), (0, 1)))
    c = random_condition(rng, depth=rng.randint(1, 3))
    want = bf.naive_satisfies(G, c, _cands(G))
    s = shift(r, freshen(c, r))
    for m in find_matches(r, G):
        got = bf.naive_satisfies(G, s, _cands(G), m.match.nodes, m.match.edges, m.interp)
        assert got == want, (c, s, G, m.describe())


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 100_000), _rule_names)
def test_right_matches_naive_satisfaction(env, seed, name):
    rng = random.Random(seed)
    r = env[name]
    G = random_graph(rng, max_nodes=3, labels=((0,), (1,), (0, 0), (0, 1)))
    c = random_condition(rng, ctx=r.lhs, scope=tuple(sorted(r.lhs_vars)), depth=rng.randint(1, 3))
    rc = right(r, c)
    for H, h, m in derive(r, G):
        want = bf.naive_satisfies(G, c, _cands(G), m.match.nodes, m.match.edges, m.interp)
        got = bf.naive_satisfies(H, rc, _cands(H), h.nodes, h.edges, m.interp)
        assert got == want, (c, rc, G, m.describe())
