"""Bounded brute-force checks.

Finite universes of concrete graphs stand in for the set of all graphs:
triple validity is checked by searching pre-images, and the condition
transformations are compared pointwise against direct computation.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from unittest import mock

from . import transform
from .econd import (
    TRUE, And, Constraint, ExistsInt, ExistsMorph, Not, Or, SatConfig, holds,
    satisfies_at,
)
from .expr import Cmp, Const, Var
from .graph import Graph
from .program import Budget, outcomes, program_rules
from .rules import RuleSchema, derive, find_matches

__all__ = [
    "Universe", "enumerate_graphs", "parse_label_pool", "ValidityReport",
    "validate_triple_bounded", "preimage_universe", "Violation", "DiffReport",
    "difftest_app", "difftest_wpost", "difftest_shift", "difftest_right",
    "difftest_transform", "random_condition", "random_graph", "MUTANTS",
    "mutant", "run_mutant",
]

DEFAULT_LABELS = ((0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Universe:
    max_nodes: int
    labels: tuple = DEFAULT_LABELS
    max_parallel: int = 1

    def __post_init__(self):
        if self.max_nodes < 0 or self.max_parallel < 0:
            raise ValueError("universe bounds must be non-negative")
        if not self.labels:
            raise ValueError("label pool must be nonempty")
        object.__setattr__(self, "labels", tuple(tuple(lab) for lab in self.labels))


def parse_label_pool(text: str) -> tuple:
    """``"0,1,0:1"`` -> ``((0,), (1,), (0, 1))``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(tuple(int(x) for x in part.split(":")))
    return tuple(out)


def enumerate_graphs(u: Universe):
    """One graph per isomorphism class within the bounds, in a fixed order."""
    pool = sorted(set(u.labels))
    for n in range(u.max_nodes + 1):
        pairs = [(s, t) for s in range(n) for t in range(n)]
        for labs in itertools.combinations_with_replacement(pool, n):
            nodes = dict(enumerate(labs))
            seen = set()
            for mult in itertools.product(range(u.max_parallel + 1), repeat=len(pairs)):
                edges = {}
                for (s, t), k in zip(pairs, mult):
                    for _ in range(k):
                        edges[len(edges)] = (s, t)
                g = Graph(nodes, edges)
                key = g.key()
                if key not in seen:
                    seen.add(key)
                    yield g


# ---------------------------------------------------------------------------
# triple validity

@dataclass
class ValidityReport:
    counterexample: Graph | None
    searched: int
    exact: bool
    checked_results: int = 0

    @property
    def valid(self) -> bool:
        return self.counterexample is None

    def __str__(self):
        head = "NoCounterexample" if self.valid else "Counterexample"
        lines = [f"{head} (results checked: {self.checked_results}, "
                 f"pre-images searched: {self.searched}, exact: {str(self.exact).lower()})"]
        if not self.valid:
            lines.append(self.counterexample.format())
        return "\n".join(lines)


def preimage_universe(u: Universe, rules) -> Universe:
    """Enlarge by the most nodes any inverse rule can create."""
    extra = max((len(r.deleted_nodes()) for r in rules), default=0)
    return Universe(u.max_nodes + extra, u.labels, u.max_parallel)


def _reachable(args):
    G, t, env, budget = args
    out = outcomes(t.program, G, env, budget)
    return set((out.ok if t.exit == "ok" else out.er)), out.truncated


def validate_triple_bounded(t, env, u_post: Universe, u_pre: Universe | None = None,
                            budget: Budget | None = None, sat: SatConfig | None = None,
                            jobs: int = 1) -> ValidityReport:
    """Search for a result graph that no presumption graph can reach."""
    sat = sat or SatConfig(warn_unanchored=False)
    budget = budget or Budget()
    if u_pre is None:
        u_pre = preimage_universe(u_post, [env[n] for n in sorted(program_rules(t.program))])
    pres = [G for G in enumerate_graphs(u_pre) if holds(G, t.pre, sat)]
    tasks = [(G, t, env, budget) for G in pres]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_reachable, tasks, chunksize=8))
    else:
        results = [_reachable(a) for a in tasks]
    reach: set = set()
    exact = True
    for keys, truncated in results:
        reach |= keys
        exact &= not truncated
    checked = 0
    for H in enumerate_graphs(u_post):
        if not holds(H, t.post, sat):
            continue
        checked += 1
        if H.key() not in reach:
            return ValidityReport(H, len(pres), exact, checked)
    return ValidityReport(None, len(pres), exact, checked)


# ---------------------------------------------------------------------------
# differential tests

@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    graph: Graph
    expected: bool
    got: bool
    detail: str = ""

    def __str__(self):
        s = (f"{self.kind} {self.subject}: expected {self.expected}, got {self.got} on "
             f"{self.graph.format()}")
        return s + (f" ({self.detail})" if self.detail else "")


@dataclass
class DiffReport:
    kind: str
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        lines = [f"{self.kind}: {self.checked} checks, {len(self.violations)} violations"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


def _names(rules) -> str:
    return "{" + ", ".join(r.name for r in rules) + "}"


def difftest_app(rule_sets, u: Universe, sat: SatConfig | None = None) -> DiffReport:
    """``G |= App(R)`` against direct match search."""
    sat = sat or SatConfig(warn_unanchored=False)
    rep = DiffReport("app")
    conds = [(rs, transform.app(rs)) for rs in map(list, rule_sets)]
    for G in enumerate_graphs(u):
        for rs, c in conds:
            want = any(find_matches(r, G) for r in rs)
            got = holds(G, c, sat)
            rep.checked += 1
            if want != got:
                rep.violations.append(Violation("app", _names(rs), G, want, got))
    return rep


def difftest_wpost(cases, u_post: Universe, u_pre: Universe | None = None,
                   sat: SatConfig | None = None) -> DiffReport:
    """``H |= WPost(R, c)`` against the direct image of ``c``-graphs.

    ``cases`` holds ``(rules, condition)`` pairs.
    """
    sat = sat or SatConfig(warn_unanchored=False)
    rep = DiffReport("wpost")
    for rs, c in cases:
        rs = list(rs)
        pre_u = u_pre or preimage_universe(u_post, rs)
        image: set = set()
        for G in enumerate_graphs(pre_u):
            if holds(G, c, sat):
                for r in rs:
                    for H, _, _ in derive(r, G):
                        image.add(H.key())
        w = transform.wpost(rs, c)
        for H in enumerate_graphs(u_post):
            want = H.key() in image
            got = holds(H, w, sat)
            rep.checked += 1
            if want != got:
                rep.violations.append(Violation("wpost", _names(rs), H, want, got))
    return rep


def difftest_shift(cases, sat: SatConfig | None = None) -> DiffReport:
    """``g |= Shift(r, c)`` against ``G |= c`` for ``(rule, condition, graph)``."""
    sat = sat or SatConfig(warn_unanchored=False)
    rep = DiffReport("shift")
    for r, c, G in cases:
        want = holds(G, c, sat)
        s = transform.shift(r, transform.freshen(c, r))
        for m in find_matches(r, G):
            got = satisfies_at(G, s, m.match.nodes, m.match.edges, m.interp, sat)
            rep.checked += 1
            if want != got:
                rep.violations.append(Violation("shift", r.name, G, want, got, m.describe()))
    return rep


def difftest_right(cases, sat: SatConfig | None = None) -> DiffReport:
    """``g |= c`` against ``h |= Right(r, c)`` over derivations ``G => H``."""
    sat = sat or SatConfig(warn_unanchored=False)
    rep = DiffReport("right")
    for r, c, G in cases:
        rc = transform.right(r, c)
        for H, h, m in derive(r, G):
            want = satisfies_at(G, c, m.match.nodes, m.match.edges, m.interp, sat)
            got = satisfies_at(H, rc, h.nodes, h.edges, m.interp, sat)
            rep.checked += 1
            if want != got:
                rep.violations.append(Violation("right", r.name, G, want, got, m.describe()))
    return rep


def difftest_transform(kind: str, inputs, u: Universe | None = None, **kw) -> DiffReport:
    if kind == "app":
        return difftest_app(inputs, u, **kw)
    if kind == "wpost":
        return difftest_wpost(inputs, u, **kw)
    if kind == "shift":
        return difftest_shift(inputs, **kw)
    if kind == "right":
        return difftest_right(inputs, **kw)
    raise ValueError(f"unknown transformation {kind!r}")


# ---------------------------------------------------------------------------
# random instances

def random_graph(rng: random.Random, max_nodes=3, labels=DEFAULT_LABELS, edge_p=0.35) -> Graph:
    n = rng.randint(1, max_nodes)
    nodes = {v: rng.choice(labels) for v in range(n)}
    edges = {}
    for s in range(n):
        for t in range(n):
            if rng.random() < edge_p:
                edges[len(edges)] = (s, t)
    return Graph(nodes, edges)


def random_condition(rng: random.Random, ctx: Graph = Graph(), scope=(), depth=2, counter=None):
    """A random condition over ``ctx``; nested labels are lists of variables.

    ``scope`` lists integer variables already bound (or interpreted).
    """
    counter = counter if counter is not None else [0]

    def fresh(stem):
        counter[0] += 1
        return f"{stem}{counter[0]}"

    choices = ["morph", "morph", "morph", "not", "and", "or", "cmp"]
    if depth <= 0:
        choices = ["cmp", "true", "morph"]
    kind = rng.choice(choices)
    if kind == "cmp" and not scope:
        kind = "morph"
    if kind == "true":
        return TRUE
    if kind == "cmp":
        x = rng.choice(scope)
        rhs = rng.choice([Const(rng.randint(0, 2))] + [Var(y) for y in scope])
        return Constraint(Cmp(rng.choice(["=", "!=", "<", ">="]), Var(x), rhs))
    if kind == "not":
        return Not(random_condition(rng, ctx, scope, depth - 1, counter))
    if kind in ("and", "or"):
        items = tuple(random_condition(rng, ctx, scope, depth - 1, counter) for _ in range(2))
        return (And if kind == "and" else Or)(items)
    # extend the context by one node (maybe with an edge) or by one edge
    nodes, edges = dict(ctx.nodes), dict(ctx.edges)
    binders = []
    if not ctx.nodes or rng.random() < 0.7:
        v = max(nodes, default=-1) + 1
        names = [fresh("u") for _ in range(rng.choice([1, 1, 2]))]
        binders = names
        nodes[v] = tuple(Var(n) for n in names)
        if ctx.nodes and rng.random() < 0.5:
            w = rng.choice(sorted(ctx.nodes))
            edges[max(edges, default=-1) + 1] = (w, v) if rng.random() < 0.5 else (v, w)
    else:
        s, t = rng.choice(sorted(ctx.nodes)), rng.choice(sorted(ctx.nodes))
        edges[max(edges, default=-1) + 1] = (s, t)
    C = Graph(nodes, edges)
    body = TRUE
    if depth > 0 and rng.random() < 0.6:
        body = random_condition(rng, C, tuple(scope) + tuple(binders), depth - 1, counter)
    out = ExistsMorph(C, body)
    for b in reversed(binders):
        out = ExistsInt(b, out)
    return out


# ---------------------------------------------------------------------------
# mutants

def _dang_drop_loop(r):
    c = _ORIG["dang"](r)
    return And(c.items[1:]) if isinstance(c, And) and len(c.items) > 1 else c


def _dang_no_outside(r):
    c = _ORIG["dang"](r)
    if not isinstance(c, And):
        return c
    keep = tuple(x for x in c.items if len(x.body.graph.nodes) == len(r.lhs.nodes))
    return And(keep) if keep else TRUE


def _app_no_dang(rules):
    rules = list(rules)
    parts = [transform.exists_ints([x for x in r.vars if x in r.lhs_vars], ExistsMorph(r.lhs))
             for r in rules]
    return transform.simplify(Or(tuple(parts))) if parts else transform.FALSE


def _wpost_no_inverse_dang(rules, c):
    parts = []
    for r in rules:
        body = transform.right(r, transform.shift(r, transform.freshen(c, r)))
        parts.append(transform.exists_ints(r.vars, ExistsMorph(r.rhs, transform.simplify(body, r.rhs))))
    return transform.simplify(Or(tuple(parts))) if parts else transform.FALSE


def _quotients_identity_only(a2, q):
    return _ORIG["enumerate_overlap_quotients"](a2, q)[:1]


def _sigma_empty(Pp, x, body):
    return []


_ORIG = {
    "dang": transform.dang,
    "enumerate_overlap_quotients": transform.enumerate_overlap_quotients,
}

# name -> (patched attribute, replacement, difftest that should notice)
MUTANTS = {
    "dang-drop-loop": ("dang", _dang_drop_loop, "app"),
    "dang-no-outside-node": ("dang", _dang_no_outside, "app"),
    "app-no-dang": ("app", _app_no_dang, "app"),
    "wpost-no-inverse-dang": ("wpost", _wpost_no_inverse_dang, "wpost"),
    "shift-identity-overlap-only": ("enumerate_overlap_quotients", _quotients_identity_only, "wpost"),
    "shift-no-substitution": ("_sigma", _sigma_empty, "wpost"),
}


@contextmanager
def mutant(name: str):
    """Temporarily replace one transformation step by its corrupted variant."""
    attr, repl, _ = MUTANTS[name]
    with mock.patch.object(transform, attr, repl):
        yield


def run_mutant(name: str, env, u: Universe | None = None) -> DiffReport:
    """Run the differential test that is expected to catch ``name``."""
    from .syntax import parse_condition
    _, _, kind = MUTANTS[name]
    with mutant(name):
        if kind == "app":
            u = u or Universe(2, DEFAULT_LABELS[:2])
            sets = [[env["delete"]], [env["init"]], [env["colour"]]]
            return difftest_app(sets, u)
        u = u or Universe(2, DEFAULT_LABELS[:2] + DEFAULT_LABELS[2:3])
        c = parse_condition("ex int a . ex { node 1 a; } . not (ex int d, k . ex { node 2 d:k; })")
        cases = [([env["init"]], TRUE), ([env["init"]], c), ([env["add"]], TRUE),
                 ([env["colour"]], TRUE)]
        return difftest_wpost(cases, u)
