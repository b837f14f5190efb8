"""Graph programs: exhaustive outcome sets and seeded single runs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .graph import Graph
from .rules import RuleSchema, apply, find_matches

__all__ = [
    "RuleSet", "Bang", "Seq", "IfElse", "Budget", "OutcomeSet",
    "outcomes", "run_random", "format_program", "parse_program",
    "program_rules", "UnknownRule",
]


@dataclass(frozen=True)
class RuleSet:
    names: tuple

    def __str__(self):
        return self.names[0] if len(self.names) == 1 else "{" + ", ".join(self.names) + "}"


@dataclass(frozen=True)
class Bang:
    body: RuleSet

    def __str__(self):
        return f"{self.body}!"


@dataclass(frozen=True)
class Seq:
    first: object
    second: object

    def __str__(self):
        return f"{self.first}; {self.second}"


@dataclass(frozen=True)
class IfElse:
    guard: RuleSet
    then: object
    orelse: object

    def __str__(self):
        return f"if {self.guard} then ({self.then}) else ({self.orelse})"


def format_program(p) -> str:
    return str(p)


def parse_program(text: str, env: Mapping | None = None):
    from .syntax import parse_program as _parse
    return _parse(text, env)


class UnknownRule(KeyError):
    pass


def program_rules(p) -> set:
    if isinstance(p, RuleSet):
        return set(p.names)
    if isinstance(p, Bang):
        return set(p.body.names)
    if isinstance(p, Seq):
        return program_rules(p.first) | program_rules(p.second)
    return set(p.guard.names) | program_rules(p.then) | program_rules(p.orelse)


def _resolve(rs: RuleSet, env) -> list:
    try:
        return [env[n] for n in rs.names]
    except KeyError as exc:
        raise UnknownRule(f"unknown rule {exc.args[0]!r}") from None


@dataclass(frozen=True)
class Budget:
    max_steps: int = 10_000
    max_nodes: int = 16

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_nodes <= 0:
            raise ValueError("budget bounds must be positive")


@dataclass
class OutcomeSet:
    """Result graphs per exit, keyed by canonical form."""
    ok: dict = field(default_factory=dict)
    er: dict = field(default_factory=dict)
    truncated: bool = False
    steps: int = 0
    states: int = 0

    def graphs(self, exit: str) -> list:
        d = self.ok if exit == "ok" else self.er
        return [d[k] for k in sorted(d, key=repr)]

    def contains(self, exit: str, H: Graph) -> bool:
        return H.key() in (self.ok if exit == "ok" else self.er)


class _Evaluator:
    def __init__(self, env, budget: Budget):
        self.env = env
        self.budget = budget
        self.truncated = False
        self.steps = 0
        self.states = 0
        self.memo: dict = {}

    def successors(self, rules, G) -> dict:
        out: dict = {}
        for r in rules:
            for m in find_matches(r, G):
                H, _ = apply(r, G, m)
                out.setdefault(H.key(), H)
        return out

    def run(self, p, G: Graph) -> tuple:
        key = (p, G.key())
        if key in self.memo:
            return self.memo[key]
        res = self._run(p, G)
        self.memo[key] = res
        return res

    def _run(self, p, G):
        if isinstance(p, RuleSet):
            self.steps += 1
            succ = self.successors(_resolve(p, self.env), G)
            if not succ:
                return {}, {G.key(): G}
            return succ, {}
        if isinstance(p, Seq):
            ok1, er1 = self.run(p.first, G)
            ok: dict = {}
            er = dict(er1)
            for g2 in ok1.values():
                ok2, er2 = self.run(p.second, g2)
                ok.update(ok2)
                er.update(er2)
            return ok, er
        if isinstance(p, IfElse):
            rules = _resolve(p.guard, self.env)
            if any(find_matches(r, G) for r in rules):
                return self.run(p.then, G)
            return self.run(p.orelse, G)
        if isinstance(p, Bang):
            return self._bang(_resolve(p.body, self.env), G), {}
        raise TypeError(f"not a program: {p!r}")

    def _bang(self, rules, G) -> dict:
        # worklist over isomorphism classes; revisits are cycles, not outputs
        ok: dict = {}
        seen = {G.key()}
        todo = [G]
        while todo:
            S = todo.pop()
            self.states += 1
            if len(S.nodes) > self.budget.max_nodes:
                self.truncated = True
                continue
            if self.steps >= self.budget.max_steps:
                self.truncated = True
                break
            self.steps += 1
            succ = self.successors(rules, S)
            if not succ:
                ok[S.key()] = S
                continue
            for k in sorted(succ, key=repr):
                if k not in seen:
                    seen.add(k)
                    todo.append(succ[k])
        return ok


def outcomes(p, G: Graph, env: Mapping[str, RuleSchema], budget: Budget | None = None) -> OutcomeSet:
    """Exhaustive ok/er result sets of ``p`` started on ``G``."""
    ev = _Evaluator(env, budget or Budget())
    ok, er = ev.run(p, G)
    return OutcomeSet(dict(ok), dict(er), ev.truncated, ev.steps, ev.states)


class _Fail(Exception):
    def __init__(self, graph):
        self.graph = graph


class _Diverged(Exception):
    def __init__(self, graph):
        self.graph = graph


def run_random(p, G: Graph, env: Mapping[str, RuleSchema], seed: int = 0,
               max_steps: int = 1000) -> tuple:
    """One execution with uniformly chosen rule/match pairs.

    Returns ``(exit, H, trace)`` where exit is ``ok``, ``er`` or
    ``diverged`` and trace lists ``(rule name, match description)``.
    """
    rng = random.Random(seed)
    trace: list = []
    steps = [0]

    def step(rules, G):
        cands = [(r, m) for r in rules for m in find_matches(r, G)]
        if not cands:
            return None
        steps[0] += 1
        if steps[0] > max_steps:
            raise _Diverged(G)
        r, m = cands[rng.randrange(len(cands))]
        trace.append((r.name, m.describe()))
        return apply(r, G, m)[0]

    def go(p, G):
        if isinstance(p, RuleSet):
            H = step(_resolve(p, env), G)
            if H is None:
                raise _Fail(G)
            return H
        if isinstance(p, Bang):
            rules = _resolve(p.body, env)
            while True:
                H = step(rules, G)
                if H is None:
                    return G
                G = H
        if isinstance(p, Seq):
            return go(p.second, go(p.first, G))
        rules = _resolve(p.guard, env)
        if any(find_matches(r, G) for r in rules):
            return go(p.then, G)
        return go(p.orelse, G)

    try:
        return "ok", go(p, G), trace
    except _Fail as f:
        return "er", f.graph, trace
    except _Diverged as d:
        return "diverged", d.graph, trace
