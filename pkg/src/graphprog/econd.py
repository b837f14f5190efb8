"""Nested graph conditions with integer quantifiers ("E-conditions").

A condition is always read relative to a context graph. ``ExistsMorph``
stores only the codomain graph: the morphism from the context is the
inclusion of the context's node and edge ids. The codomain may relabel a
context node that is unlabelled in the context.

Satisfaction binds quantified integers lazily: while matching a codomain
graph into the host graph, label items that are unbound variables (or linear
in one) take their value from the host label. Anything left unbound falls back
to a finite candidate set, and quantifiers that never reach a graph label are
reported as unanchored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .expr import (
    CAnd, CFalse, CNot, COr, CTrue, Cmp, apply_subst, constraint_consts,
    constraint_vars, eval_expr, format_label, label_consts, label_vars,
    solve_linear,
)
from .graph import Graph, same_label, search_morphisms

__all__ = [
    "TrueC", "Constraint", "ExistsInt", "ExistsMorph", "Not", "And", "Or",
    "TRUE", "FALSE", "conj", "disj", "exists_ints", "forall_ints", "forall_morph",
    "implies", "free_vars", "bound_vars", "subst_condition", "CaptureError",
    "SatConfig", "satisfies", "satisfies_at", "holds", "simplify",
    "canonical", "alpha_equal", "check_condition", "format_condition",
    "EMPTY", "condition_size",
]

EMPTY = Graph()


@dataclass(frozen=True)
class TrueC:
    pass


@dataclass(frozen=True)
class Constraint:
    gamma: object


@dataclass(frozen=True)
class ExistsInt:
    var: str
    body: object


@dataclass(frozen=True)
class ExistsMorph:
    graph: Graph
    body: object = TrueC()
    name: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


TRUE = TrueC()
FALSE = Not(TRUE)


def conj(*items):
    return And(tuple(items))


def disj(*items):
    return Or(tuple(items))


def exists_ints(names, body):
    for x in reversed(list(names)):
        body = ExistsInt(x, body)
    return body


def forall_ints(names, body):
    return Not(exists_ints(names, Not(body)))


def forall_morph(graph: Graph, body):
    return Not(ExistsMorph(graph, Not(body)))


def implies(a, b):
    return Or((Not(a), b))


# ---------------------------------------------------------------------------
# variables and substitution

def _graph_vars(g: Graph) -> set:
    out: set = set()
    for lab in g.nodes.values():
        out |= label_vars(lab)
    return out


@lru_cache(maxsize=None)
def free_vars(c) -> frozenset:
    """Variables not bound by an integer quantifier."""
    if isinstance(c, TrueC):
        return frozenset()
    if isinstance(c, Constraint):
        return frozenset(constraint_vars(c.gamma))
    if isinstance(c, ExistsInt):
        return free_vars(c.body) - {c.var}
    if isinstance(c, ExistsMorph):
        return frozenset(_graph_vars(c.graph)) | free_vars(c.body)
    if isinstance(c, Not):
        return free_vars(c.body)
    if isinstance(c, (And, Or)):
        out = frozenset()
        for i in c.items:
            out |= free_vars(i)
        return out
    raise TypeError(f"not a condition: {c!r}")


def bound_vars(c) -> set:
    out: set = set()

    def walk(x):
        if isinstance(x, ExistsInt):
            out.add(x.var)
            walk(x.body)
        elif isinstance(x, (ExistsMorph, Not)):
            walk(x.body)
        elif isinstance(x, (And, Or)):
            for i in x.items:
                walk(i)

    walk(c)
    return out


class CaptureError(ValueError):
    pass


def _subst_graph(g: Graph, sigma) -> Graph:
    return Graph({v: apply_subst(lab, sigma) for v, lab in g.nodes.items()}, g.edges)


def subst_condition(c, sigma):
    """Capture-avoiding substitution of free variables.

    Raises :class:`CaptureError` if a binder would capture a variable of the
    substituted expressions; rename first.
    """
    if not sigma:
        return c
    if isinstance(c, TrueC):
        return c
    if isinstance(c, Constraint):
        return Constraint(apply_subst(c.gamma, sigma))
    if isinstance(c, ExistsInt):
        inner = {k: v for k, v in sigma.items() if k != c.var}
        if not inner:
            return c
        from .expr import expr_vars
        relevant = {k: v for k, v in inner.items() if k in free_vars(c.body)}
        for v in relevant.values():
            if c.var in expr_vars(v):
                raise CaptureError(f"substitution would capture {c.var!r}")
        return ExistsInt(c.var, subst_condition(c.body, inner))
    if isinstance(c, ExistsMorph):
        return ExistsMorph(_subst_graph(c.graph, sigma), subst_condition(c.body, sigma), c.name)
    if isinstance(c, Not):
        return Not(subst_condition(c.body, sigma))
    return type(c)(tuple(subst_condition(i, sigma) for i in c.items))


def check_condition(c, ctx: Graph = EMPTY) -> list:
    """Well-formedness problems of ``c`` over ``ctx`` (empty list if none)."""
    problems: list = []

    def walk(x, ctx):
        if isinstance(x, ExistsMorph):
            g = x.graph
            for v, lab in ctx.nodes.items():
                if v not in g.nodes:
                    problems.append(f"context node {v} missing from nested graph")
                elif lab is not None and not same_label(lab, g.nodes[v]):
                    problems.append(f"nested graph changes the label of node {v}")
            for e, st in ctx.edges.items():
                if g.edges.get(e) != st:
                    problems.append(f"context edge {e} missing from nested graph")
            walk(x.body, g)
        elif isinstance(x, (ExistsInt, Not)):
            walk(x.body, ctx)
        elif isinstance(x, (And, Or)):
            for i in x.items:
                walk(i, ctx)
        elif not isinstance(x, (TrueC, Constraint)):
            problems.append(f"unknown condition node {type(x).__name__}")

    walk(c, ctx)
    return problems


def condition_size(c) -> int:
    if isinstance(c, (ExistsInt, ExistsMorph, Not)):
        return 1 + condition_size(c.body)
    if isinstance(c, (And, Or)):
        return 1 + sum(condition_size(i) for i in c.items)
    return 1


# ---------------------------------------------------------------------------
# satisfaction

@dataclass(frozen=True)
class SatConfig:
    """``int_window`` widens the integer candidate set to ``[-W, W]``."""
    int_window: int = 2
    warn_unanchored: bool = True

    def __post_init__(self):
        if self.int_window < 0:
            raise ValueError("int_window must be non-negative")


def _consts(c, out: set) -> None:
    if isinstance(c, Constraint):
        out |= constraint_consts(c.gamma)
    elif isinstance(c, ExistsMorph):
        for lab in c.graph.nodes.values():
            out |= label_consts(lab)
        _consts(c.body, out)
    elif isinstance(c, (ExistsInt, Not)):
        _consts(c.body, out)
    elif isinstance(c, (And, Or)):
        for i in c.items:
            _consts(i, out)


def unanchored(c) -> list:
    """Integer quantifiers whose variable occurs in no nested graph label."""
    out: list = []

    def graph_vars_below(x) -> set:
        if isinstance(x, ExistsMorph):
            return _graph_vars(x.graph) | graph_vars_below(x.body)
        if isinstance(x, (ExistsInt, Not)):
            return graph_vars_below(x.body)
        if isinstance(x, (And, Or)):
            s: set = set()
            for i in x.items:
                s |= graph_vars_below(i)
            return s
        return set()

    def walk(x):
        if isinstance(x, ExistsInt):
            if x.var not in graph_vars_below(x.body) and x.var in free_vars(x.body):
                out.append(x.var)
            walk(x.body)
        elif isinstance(x, (ExistsMorph, Not)):
            walk(x.body)
        elif isinstance(x, (And, Or)):
            for i in x.items:
                walk(i)

    walk(c)
    return out


class _Checker:
    def __init__(self, G: Graph, c, cfg: SatConfig):
        self.G = G
        vals: set = set()
        for lab in G.nodes.values():
            vals.update(lab or ())
        _consts(c, vals)
        vals.update(range(-cfg.int_window, cfg.int_window + 1))
        self.candidates = sorted(vals)

    # ``I`` maps bound variables to integers; ``pending`` holds quantified
    # variables that may still be bound by unification.

    def sols(self, c, nmap, emap, I, pending) -> Iterator[dict]:
        live = pending & free_vars(c)
        live = frozenset(v for v in live if v not in I)
        if not live:
            if any(True for _ in self._sols(c, nmap, emap, I, frozenset())):
                yield I
            return
        seen = set()
        for sol in self._sols(c, nmap, emap, I, live):
            key = tuple(sorted((k, sol[k]) for k in live if k in sol))
            if key not in seen:
                seen.add(key)
                yield sol

    def _enumerate(self, names, I) -> Iterator[dict]:
        names = sorted(names)
        for vals in itertools.product(self.candidates, repeat=len(names)):
            J = dict(I)
            J.update(zip(names, vals))
            yield J

    def _sols(self, c, nmap, emap, I, pending):
        if isinstance(c, TrueC):
            yield I
        elif isinstance(c, Constraint):
            yield from self._constraint(c.gamma, I, pending)
        elif isinstance(c, ExistsInt):
            x = c.var
            outer = I.get(x)
            I2 = {k: v for k, v in I.items() if k != x}
            for sol in self.sols(c.body, nmap, emap, I2, pending | {x}):
                out = {k: v for k, v in sol.items() if k != x}
                if outer is not None:
                    out[x] = outer
                yield out
        elif isinstance(c, ExistsMorph):
            yield from self._morph(c, nmap, emap, I, pending)
        elif isinstance(c, Not):
            need = [v for v in free_vars(c.body) if v not in I]
            stray = [v for v in need if v not in pending]
            if stray:
                raise ValueError(f"free variables {sorted(stray)} in condition")
            for J in self._enumerate(need, I) if need else [I]:
                if not any(True for _ in self.sols(c.body, nmap, emap, J, frozenset())):
                    yield J
        elif isinstance(c, And):
            yield from self._conj(c.items, 0, nmap, emap, I, pending)
        elif isinstance(c, Or):
            for item in c.items:
                yield from self.sols(item, nmap, emap, I, pending)
        else:
            raise TypeError(f"not a condition: {c!r}")

    def _conj(self, items, i, nmap, emap, I, pending):
        if i == len(items):
            yield I
            return
        for J in self.sols(items[i], nmap, emap, I, pending):
            yield from self._conj(items, i + 1, nmap, emap, J, pending)

    def _constraint(self, gamma, I, pending):
        need = [v for v in constraint_vars(gamma) if v not in I]
        if not need:
            if _eval(gamma, I):
                yield I
            return
        stray = [v for v in need if v not in pending]
        if stray:
            raise ValueError(f"free variables {sorted(stray)} in condition")
        if len(need) == 1 and isinstance(gamma, Cmp) and gamma.op == "=":
            from .expr import BinOp
            got = solve_linear(BinOp("-", gamma.left, gamma.right), 0, I)
            if got is False:
                return
            if got is not None:
                J = dict(I)
                J[got[0]] = got[1]
                if _eval(gamma, J):
                    yield J
                return
        for J in self._enumerate(need, I):
            if _eval(gamma, J):
                yield J

    def _unify(self, label, glabel, st, pending):
        if label is None:
            return st
        if glabel is None or len(label) != len(glabel):
            return None
        I, deferred = st
        for item, g in zip(label, glabel):
            v = eval_expr(item, I)
            if v is not None:
                if v != g:
                    return None
                continue
            got = solve_linear(item, g, I)
            if got is False:
                return None
            if got is not None and got[0] in pending:
                I = dict(I)
                I[got[0]] = got[1]
                if eval_expr(item, I) != g:
                    return None
                continue
            deferred = deferred + ((item, g),)
        return I, deferred

    def _resolve(self, deferred, I, pending):
        """Bind what the deferred label items force, enumerate the rest."""
        progress = True
        while progress and deferred:
            progress = False
            rest = []
            for item, g in deferred:
                v = eval_expr(item, I)
                if v is not None:
                    if v != g:
                        return
                    progress = True
                    continue
                got = solve_linear(item, g, I)
                if got is False:
                    return
                if got is not None and got[0] in pending:
                    I = dict(I)
                    I[got[0]] = got[1]
                    progress = True
                    continue
                rest.append((item, g))
            deferred = rest
        if not deferred:
            yield I
            return
        from .expr import expr_vars
        need = set()
        for item, _ in deferred:
            need |= {v for v in expr_vars(item) if v not in I}
        stray = need - pending
        if stray:
            raise ValueError(f"free variables {sorted(stray)} in condition")
        for J in self._enumerate(need, I):
            if all(eval_expr(item, J) == g for item, g in deferred):
                yield J

    def _morph(self, c: ExistsMorph, nmap, emap, I, pending):
        C, G = c.graph, self.G
        st = (I, ())
        fixed_n = {v: nmap[v] for v in C.nodes if v in nmap}
        fixed_e = {e: emap[e] for e in C.edges if e in emap}
        for v, w in fixed_n.items():
            st = self._unify(C.nodes[v], G.nodes[w], st, pending)
            if st is None:
                return
        for e, f in fixed_e.items():
            s, t = C.edges[e]
            if G.edges[f] != (fixed_n.get(s), fixed_n.get(t)):
                return

        def node_ok(v, w, st):
            return self._unify(C.nodes[v], G.nodes[w], st, pending)

        for n2, e2, (J, deferred) in search_morphisms(C, G, node_ok, st, fixed_n, fixed_e):
            for K in self._resolve(deferred, J, pending):
                yield from self.sols(c.body, n2, e2, K, pending)


def _eval(gamma, I) -> bool:
    from .expr import eval_constraint
    return eval_constraint(gamma, I)


def satisfies_at(G: Graph, c, nodes: dict, edges: dict | None = None,
                 interp: dict | None = None, cfg: SatConfig | None = None) -> bool:
    """``p |=^I c`` for the morphism given by ``nodes``/``edges`` into ``G``."""
    cfg = cfg or SatConfig()
    interp = dict(interp or {})
    stray = set(free_vars(c)) - set(interp)
    if stray:
        raise ValueError(f"free variables {sorted(stray)} not interpreted")
    chk = _Checker(G, c, cfg)
    return any(True for _ in chk.sols(c, dict(nodes), dict(edges or {}), interp, frozenset()))


def satisfies(G: Graph, c, cfg: SatConfig | None = None) -> tuple:
    """Whether ``G`` satisfies the closed condition ``c``, plus warnings."""
    cfg = cfg or SatConfig()
    fv = free_vars(c)
    if fv:
        raise ValueError(f"condition has free variables {sorted(fv)}")
    warnings = []
    if cfg.warn_unanchored:
        warnings = [f"integer variable {x!r} is unanchored; checked over a finite window"
                    for x in unanchored(c)]
    return satisfies_at(G, c, {}, {}, {}, cfg), warnings


def holds(G: Graph, c, cfg: SatConfig | None = None) -> bool:
    return satisfies(G, c, cfg)[0]


# ---------------------------------------------------------------------------
# simplification

def _is_false(c) -> bool:
    return isinstance(c, Not) and isinstance(c.body, TrueC)


def simplify(c, ctx: Graph = EMPTY):
    """Equivalence-preserving cleanup: units, flattening, double negation."""
    if isinstance(c, TrueC):
        return c
    if isinstance(c, Constraint):
        if isinstance(c.gamma, CTrue):
            return TRUE
        if isinstance(c.gamma, CFalse):
            return FALSE
        return c
    if isinstance(c, Not):
        b = simplify(c.body, ctx)
        if isinstance(b, Not):
            return b.body
        return Not(b)
    if isinstance(c, (And, Or)):
        unit, zero = (TrueC, _is_false) if isinstance(c, And) else (_is_false, None)
        flat: list = []
        for item in c.items:
            s = simplify(item, ctx)
            if type(s) is type(c):
                flat.extend(s.items)
            else:
                flat.append(s)
        out: list = []
        for s in flat:
            if isinstance(c, And):
                if isinstance(s, TrueC):
                    continue
                if _is_false(s):
                    return FALSE
            else:
                if _is_false(s):
                    continue
                if isinstance(s, TrueC):
                    return TRUE
            if s not in out:
                out.append(s)
        if not out:
            return TRUE if isinstance(c, And) else FALSE
        if len(out) == 1:
            return out[0]
        return type(c)(tuple(out))
    if isinstance(c, ExistsInt):
        b = simplify(c.body, ctx)
        if c.var not in free_vars(b):
            return b
        return ExistsInt(c.var, b)
    if isinstance(c, ExistsMorph):
        b = simplify(c.body, c.graph)
        if _is_false(b):
            return FALSE
        if c.graph == ctx:
            return b
        return ExistsMorph(c.graph, b, c.name)
    raise TypeError(f"not a condition: {c!r}")


# ---------------------------------------------------------------------------
# alpha-canonical form, used for syntactic comparison

def _canon(c, ctx_ids: dict, vmap: dict, counter: list) -> str:
    if isinstance(c, TrueC):
        return "T"
    if isinstance(c, Constraint):
        return "C(" + str(apply_subst(c.gamma, {k: _V(v) for k, v in vmap.items()})) + ")"
    if isinstance(c, Not):
        if isinstance(c.body, TrueC):
            return "F"
        return "N(" + _canon(c.body, ctx_ids, vmap, counter) + ")"
    if isinstance(c, (And, Or)):
        parts = sorted(_canon(i, ctx_ids, vmap, list(counter)) for i in c.items)
        return ("A" if isinstance(c, And) else "O") + "[" + ",".join(parts) + "]"
    if isinstance(c, ExistsInt):
        block = []
        body = c
        while isinstance(body, ExistsInt):
            block.append(body.var)
            body = body.body
        names = list(dict.fromkeys(block))
        perms = itertools.permutations(names) if len(names) <= 4 else [tuple(names)]
        best = None
        for perm in perms:
            vm = dict(vmap)
            base = counter[0]
            for i, x in enumerate(perm):
                vm[x] = f"v{base + i}"
            s = _canon(body, ctx_ids, vm, [base + len(perm)])
            if best is None or s < best:
                best = s
        return f"E{len(names)}(" + best + ")"
    if isinstance(c, ExistsMorph):
        g = c.graph
        sub = {k: _V(v) for k, v in vmap.items()}

        def lab(v):
            return format_label(apply_subst(g.nodes[v], sub)) if g.nodes[v] is not None else "_"

        new = [v for v in g.nodes if v not in ctx_ids]
        new.sort(key=lambda v: (lab(v), sum(1 for st in g.edges.values() if v in st), v))
        ids = dict(ctx_ids)
        nxt = len(ctx_ids)
        for v in new:
            ids[v] = nxt
            nxt += 1
        nodes = ",".join(f"{ids[v]}={lab(v)}" for v in sorted(g.nodes, key=lambda v: ids[v]))
        edges = ",".join(f"{a}>{b}" for a, b in sorted((ids[s], ids[t]) for s, t in g.edges.values()))
        return "M{" + nodes + "|" + edges + "}(" + _canon(c.body, ids, vmap, counter) + ")"
    raise TypeError(f"not a condition: {c!r}")


class _V:
    """Renamed-variable placeholder that prints as its new name."""
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __str__(self):
        return self.name


def canonical(c, ctx: Graph = EMPTY) -> str:
    """Alpha-invariant fingerprint: equal strings mean equivalent conditions."""
    return _canon(c, {v: i for i, v in enumerate(sorted(ctx.nodes))}, {}, [0])


def alpha_equal(a, b, ctx: Graph = EMPTY) -> bool:
    return a == b or canonical(a, ctx) == canonical(b, ctx)


# ---------------------------------------------------------------------------
# printing

def _format_graph(g: Graph, ctx: Graph) -> str:
    parts = []
    for v in sorted(g.nodes):
        lab = g.nodes[v]
        if v in ctx.nodes and ctx.nodes[v] == lab:
            continue
        parts.append(f"node {v} {format_label(lab)};" if lab is not None else f"node {v};")
    new_edges = sorted((e, st) for e, st in g.edges.items() if e not in ctx.edges)
    used = set()
    for e, (s, t) in new_edges:
        if e in used:
            continue
        twin = next((f for f, st in new_edges
                     if f not in used and f != e and st == (t, s) and s != t), None)
        if twin is not None and s < t:
            used.update((e, twin))
            parts.append(f"edge {s} -- {t};")
        else:
            used.add(e)
            parts.append(f"edge {s} -> {t};")
    return "{ " + " ".join(parts) + " }" if parts else "{ }"


def format_condition(c, ctx: Graph = EMPTY) -> str:
    """Text rendering that the condition parser reads back."""
    if isinstance(c, TrueC):
        return "true"
    if isinstance(c, Constraint):
        return _fmt_gamma(c.gamma)
    if isinstance(c, Not):
        if isinstance(c.body, TrueC):
            return "false"
        return "not " + _atom(c.body, ctx)
    if isinstance(c, And):
        return " and ".join(_atom(i, ctx) for i in c.items)
    if isinstance(c, Or):
        return " or ".join(_atom(i, ctx) for i in c.items)
    if isinstance(c, ExistsInt):
        names = [c.var]
        body = c.body
        while isinstance(body, ExistsInt):
            names.append(body.var)
            body = body.body
        return f"ex int {', '.join(names)} . " + _atom(body, ctx)
    if isinstance(c, ExistsMorph):
        head = "ex " + (c.name + " " if c.name else "") + _format_graph(c.graph, ctx)
        if isinstance(c.body, TrueC):
            return head
        return head + " . " + _atom(c.body, c.graph)
    raise TypeError(f"not a condition: {c!r}")


def _atom(c, ctx) -> str:
    s = format_condition(c, ctx)
    if isinstance(c, (TrueC, Not)) or (isinstance(c, ExistsMorph) and isinstance(c.body, TrueC)):
        return s
    if isinstance(c, Constraint) and isinstance(c.gamma, Cmp):
        return s
    return "(" + s + ")"


def _fmt_gamma(g) -> str:
    if isinstance(g, Cmp):
        return f"{g.left} {g.op} {g.right}"
    if isinstance(g, CTrue):
        return "true"
    if isinstance(g, CFalse):
        return "false"
    if isinstance(g, CNot):
        return f"not ({_fmt_gamma(g.arg)})"
    op = "and" if isinstance(g, CAnd) else "or"
    return f"({_fmt_gamma(g.left)}) {op} ({_fmt_gamma(g.right)})"
