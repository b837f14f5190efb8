import os

import pytest
from hypothesis import given, settings, strategies as st

from graphprog.graph import Graph, isomorphic
from graphprog.program import (
    Bang, Budget, IfElse, RuleSet, Seq, UnknownRule, outcomes, run_random,
)
from graphprog.rules import derive
from graphprog.syntax import ParseError, Workspace, parse_graph, parse_program

TRIANGLE = parse_graph("{ node 1 1; node 2 2; node 3 3; edge 1 -- 2; edge 2 -- 3; edge 1 -- 3; }")
SINGLE = parse_graph("{ node 1 1:2; }")
COLOURING = Seq(RuleSet(("init",)), Bang(RuleSet(("colour",))))


def naive_outcomes(p, G, env, depth=12):
    """Direct recursive reading of the semantics; loops unrolled to ``depth``."""
    if isinstance(p, RuleSet):
        succ = [H for n in p.names for H, _, _ in derive(env[n], G)]
        return (succ, []) if succ else ([], [G])
    if isinstance(p, Seq):
        ok1, er = naive_outcomes(p.first, G, env, depth)
        ok = []
        for H in ok1:
            a, b = naive_outcomes(p.second, H, env, depth)
            ok += a
            er += b
        return ok, er
    if isinstance(p, IfElse):
        if any(derive(env[n], G) for n in p.guard.names):
            return naive_outcomes(p.then, G, env, depth)
        return naive_outcomes(p.orelse, G, env, depth)
    succ = [H for n in p.body.names for H, _, _ in derive(env[n], G)]
    if not succ:
        return [G], []
    assert depth > 0, "loop did not terminate within the unrolling bound"
    ok = []
    for H in succ:
        ok += naive_outcomes(p, H, env, depth - 1)[0]
    return ok, []


def keys(graphs):
    return {g.key() for g in graphs}


def test_nop_loop_has_no_outcomes(env):
    for G in (Graph(), TRIANGLE, SINGLE):
        res = outcomes(Bang(RuleSet(("nop",))), G, env)
        assert not res.ok and not res.er and not res.truncated


def test_loop_never_fails(env):
    for G in (Graph(), TRIANGLE, SINGLE):
        for name in env:
            assert not outcomes(Bang(RuleSet((name,))), G, env, Budget(max_steps=500)).er


def test_colouring_triangle(env):
    res = outcomes(COLOURING, TRIANGLE, env)
    assert not res.er and not res.truncated
    colourings = {tuple(sorted(lab[1] for lab in H.nodes.values())) for H in res.graphs("ok")}
    assert (0, 1, 2) in colourings and (0, 1, 1) in colourings
    ok, er = naive_outcomes(COLOURING, TRIANGLE, env)
    assert set(res.ok) == keys(ok) and not er


def test_colouring_fails_on_pair_label(env):
    res = outcomes(COLOURING, SINGLE, env)
    assert not res.ok
    assert res.graphs("er") == [SINGLE]


def test_add_loop_is_truncated(env):
    res = outcomes(Bang(RuleSet(("add",))), Graph(), env, Budget(max_steps=100, max_nodes=4))
    assert res.truncated and not res.ok


def test_if_then_else(env):
    p = parse_program("if init then delete else add", env)
    assert isinstance(p, IfElse)
    res = outcomes(p, Graph({0: (3,)}), env)
    assert set(res.ok) == {Graph().key()}
    res = outcomes(p, SINGLE, env)
    assert len(res.ok) == 1 and all(len(H.nodes) == 2 for H in res.graphs("ok"))


def test_unknown_rule(env):
    with pytest.raises(UnknownRule):
        outcomes(RuleSet(("nosuch",)), Graph(), env)
    with pytest.raises(ParseError):
        parse_program("nosuch", env)


def test_parse_shapes():
    assert parse_program("init; colour!") == COLOURING
    assert parse_program("{init, delete}!") == Bang(RuleSet(("init", "delete")))
    assert isinstance(parse_program("if {r} then p else q"), IfElse)
    assert str(parse_program("init; (colour!; delete)")) == "init; colour!; delete"


@pytest.mark.parametrize("bad", ["colour!!", "init;", "if r then p", "{}", "(init"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_program(bad)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_program("init;\n colour!!")
    assert info.value.line == 2


def test_random_run_is_an_outcome(env):
    res = outcomes(COLOURING, TRIANGLE, env)
    for seed in range(8):
        exit_, H, trace = run_random(COLOURING, TRIANGLE, env, seed=seed)
        assert exit_ == "ok" and res.contains("ok", H)
        assert trace[0][0] == "init"


def test_random_run_fails_like_outcomes(env):
    exit_, H, trace = run_random(COLOURING, SINGLE, env, seed=1)
    assert (exit_, H, trace) == ("er", SINGLE, [])


def test_random_run_is_deterministic(env):
    assert run_random(COLOURING, TRIANGLE, env, seed=4) == run_random(COLOURING, TRIANGLE, env, seed=4)


def test_random_run_reports_divergence(env):
    exit_, _, trace = run_random(Bang(RuleSet(("nop",))), Graph(), env, max_steps=20)
    assert exit_ == "diverged" and len(trace) == 20


def test_sample_program_loads(samples):
    ws = Workspace().load(os.path.join(samples, "colouring.grs"))
    assert ws.programs["colouring"] == COLOURING


_programs = st.recursive(
    st.sampled_from(["init", "colour", "delete", "loop_add", "{init, delete}"]).map(parse_program),
    lambda sub: st.one_of(
        st.builds(Seq, sub, sub),
        st.builds(lambda g, a, b: IfElse(RuleSet((g,)), a, b),
                  st.sampled_from(["init", "colour", "delete"]), sub, sub),
        st.sampled_from(["init", "colour", "delete"]).map(lambda n: Bang(RuleSet((n,)))),
    ),
    max_leaves=4,
)

_hosts = st.sampled_from([
    Graph(), SINGLE, TRIANGLE,
    parse_graph("{ node 1 1; node 2 2:0; edge 1 -> 2; }"),
    parse_graph("{ node 1 0:0; node 2 5; edge 1 -- 2; edge 2 -> 2; }"),
])


@settings(max_examples=60, deadline=None)
@given(_programs, _hosts)
def test_outcomes_agree_with_naive_semantics(env, p, G):
    res = outcomes(p, G, env)
    assert not res.truncated
    ok, er = naive_outcomes(p, G, env)
    assert set(res.ok) == keys(ok)
    assert set(res.er) == keys(er)
