"""Condition transformations across rules: App, Dang, Shift, Right, WPost.

``shift`` moves a closed condition onto the left-hand side of a rule, so it
can be read at a match. ``right`` carries a left-hand condition across the
rule to the right-hand side. ``wpost`` combines both with the dangling
condition of the inverse rule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .econd import (
    FALSE, TRUE, And, Constraint, ExistsInt, ExistsMorph, Not, Or, TrueC,
    CaptureError, bound_vars, exists_ints, free_vars, simplify, subst_condition,
)
from .expr import Cmp, Var, apply_subst, as_expr, normalize
from .graph import (
    Graph, LabelClash, Morphism, enumerate_overlap_quotients, inclusion,
    pushout, pushout_complement,
)
from .rules import RuleSchema, invert

__all__ = [
    "freshen", "dang", "app", "shift", "shift_from", "right", "right_along",
    "wpost", "Span", "rule_span",
]


# ---------------------------------------------------------------------------
# freshening

def _all_vars(c) -> set:
    out = set(bound_vars(c)) | set(free_vars(c))

    def walk(x):
        if isinstance(x, ExistsMorph):
            for lab in x.graph.nodes.values():
                for item in lab or ():
                    from .expr import expr_vars
                    out.update(expr_vars(item))
            walk(x.body)
        elif isinstance(x, (ExistsInt, Not)):
            walk(x.body)
        elif isinstance(x, (And, Or)):
            for i in x.items:
                walk(i)

    walk(c)
    return out


def freshen(c, r: RuleSchema | None = None, avoid=()):
    """Rename binders apart and replace non-variable label items.

    Binders clashing with the rule's variables (or with each other) get new
    names. A label item that is not a plain variable becomes a new variable
    bound just outside its graph and equated to the item inside it.
    """
    taken = set(avoid) | _all_vars(c)
    reserved = set(r.vars) if r is not None else set()
    taken |= reserved
    used: set = set()

    def fresh(base):
        stem = base.rstrip("0123456789_") or "v"
        n = 1
        while f"{stem}_{n}" in taken:
            n += 1
        name = f"{stem}_{n}"
        taken.add(name)
        return name

    def binder(x):
        if x in reserved or x in used:
            x = fresh(x)
        used.add(x)
        return x

    def walk(x, ctx_old: Graph, ctx_new: Graph, ren: dict):
        if isinstance(x, TrueC):
            return x
        if isinstance(x, Constraint):
            return Constraint(apply_subst(x.gamma, ren))
        if isinstance(x, ExistsInt):
            nx = binder(x.var)
            ren2 = dict(ren)
            ren2[x.var] = Var(nx)
            return ExistsInt(nx, walk(x.body, ctx_old, ctx_new, ren2))
        if isinstance(x, Not):
            return Not(walk(x.body, ctx_old, ctx_new, ren))
        if isinstance(x, (And, Or)):
            return type(x)(tuple(walk(i, ctx_old, ctx_new, ren) for i in x.items))
        C = x.graph
        nodes = {}
        binders: list = []
        eqs: list = []
        for v in sorted(C.nodes):
            lab = C.nodes[v]
            if v in ctx_old.nodes and ctx_old.nodes[v] == lab:
                nodes[v] = ctx_new.nodes[v]
                continue
            if lab is None:
                nodes[v] = None
                continue
            items = []
            for item in lab:
                it = apply_subst(as_expr(item), ren)
                if isinstance(it, Var):
                    items.append(it)
                else:
                    z = fresh("z")
                    binders.append(z)
                    eqs.append(Constraint(Cmp("=", Var(z), it)))
                    items.append(Var(z))
            nodes[v] = tuple(items)
        C2 = Graph(nodes, C.edges)
        body = walk(x.body, C, C2, ren)
        if eqs:
            body = And(tuple(eqs) + (body,))
        return exists_ints(binders, ExistsMorph(C2, body, x.name))

    return walk(c, Graph(), Graph(), {})


# ---------------------------------------------------------------------------
# applicability

def dang(r: RuleSchema):
    """Forbid every one-edge extension of the left-hand side that dangles.

    Extensions: a loop on a deleted node, an edge between two left-hand nodes
    one of which is deleted, or an edge between a deleted node and a new
    unlabelled node (both directions).
    """
    L = r.lhs
    deleted = r.deleted_nodes()
    if not deleted:
        return TRUE
    e = L.fresh_edge()
    n = L.fresh_node()
    exts = []
    for u in deleted:
        exts.append(Graph(L.nodes, {**L.edges, e: (u, u)}))
    for u in sorted(L.nodes):
        for v in sorted(L.nodes):
            if u != v and (u in deleted or v in deleted):
                exts.append(Graph(L.nodes, {**L.edges, e: (u, v)}))
    for u in deleted:
        nodes = {**L.nodes, n: None}
        exts.append(Graph(nodes, {**L.edges, e: (u, n)}))
        exts.append(Graph(nodes, {**L.edges, e: (n, u)}))
    return And(tuple(Not(ExistsMorph(g)) for g in exts))


def app(rules):
    """Closed condition satisfied exactly by graphs where some rule applies."""
    rules = list(rules)
    if not rules:
        return FALSE
    parts = []
    for r in rules:
        names = [x for x in r.vars if x in r.lhs_vars]
        parts.append(exists_ints(names, ExistsMorph(r.lhs, dang(r))))
    return simplify(Or(tuple(parts)))


# ---------------------------------------------------------------------------
# shift

def _positions(c, x) -> set:
    """(label length, index) pairs where ``x`` is a plain item in nested graphs."""
    out: set = set()

    def walk(y):
        if isinstance(y, ExistsMorph):
            for lab in y.graph.nodes.values():
                if lab is None:
                    continue
                for j, item in enumerate(lab):
                    if isinstance(item, Var) and item.name == x:
                        out.add((len(lab), j))
            walk(y.body)
        elif isinstance(y, ExistsInt):
            if y.var != x:
                walk(y.body)
        elif isinstance(y, Not):
            walk(y.body)
        elif isinstance(y, (And, Or)):
            for i in y.items:
                walk(i)

    walk(c)
    return out


def _sigma(Pp: Graph, x, body) -> list:
    pos = _positions(body, x)
    out, seen = [], set()
    for v in sorted(Pp.nodes):
        lab = Pp.nodes[v]
        if lab is None:
            continue
        for j, item in enumerate(lab):
            if (len(lab), j) not in pos:
                continue
            e = normalize(as_expr(item))
            if str(e) not in seen:
                seen.add(str(e))
                out.append(e)
    return out


def _disjuncts(c) -> tuple:
    return c.items if isinstance(c, Or) else (c,)


def shift_from(p: Morphism, c):
    """Move ``c`` (over ``p.dom``) along ``p`` to a condition over ``p.cod``."""
    Pp = p.cod
    if isinstance(c, (TrueC, Constraint)):
        return c
    if isinstance(c, Not):
        return Not(shift_from(p, c.body))
    if isinstance(c, (And, Or)):
        return type(c)(tuple(shift_from(p, i) for i in c.items))
    if isinstance(c, ExistsInt):
        x = c.var
        S = simplify(shift_from(p, c.body), Pp)
        out = [ExistsInt(x, S)]
        for l in _sigma(Pp, x, c.body):
            T = simplify(shift_from(p, subst_condition(c.body, {x: l})), Pp)
            # disjuncts already covered by the instance S[x:=l] of the first
            # disjunct add nothing
            try:
                covered = set(_disjuncts(simplify(subst_condition(S, {x: l}), Pp)))
            except CaptureError:
                covered = set()
            rest = [d for d in _disjuncts(T) if d not in covered]
            if rest:
                out.append(rest[0] if len(rest) == 1 else Or(tuple(rest)))
        return out[0] if len(out) == 1 else Or(tuple(out))
    if isinstance(c, ExistsMorph):
        a = inclusion(p.dom, c.graph)
        try:
            _, a2, q = pushout(p, a)
        except LabelClash:
            return FALSE
        parts = [ExistsMorph(E, shift_from(s, c.body))
                 for E, _, s in enumerate_overlap_quotients(a2, q)]
        return parts[0] if len(parts) == 1 else Or(tuple(parts))
    raise TypeError(f"not a condition: {c!r}")


def shift(r: RuleSchema, c):
    """Condition over the left-hand side equivalent to ``c`` at every match."""
    return simplify(shift_from(inclusion(Graph(), r.lhs), c), r.lhs)


# ---------------------------------------------------------------------------
# right

@dataclass(frozen=True)
class Span:
    """A rule-like span ``X <- Z -> Y``; both legs given as morphisms."""
    zx: Morphism
    zy: Morphism

    @property
    def left(self) -> Graph:
        return self.zx.cod

    @property
    def right(self) -> Graph:
        return self.zy.cod


def rule_span(r: RuleSchema) -> Span:
    _, _, _, kl, kr = r.span()
    return Span(kl, kr)


def right_along(sp: Span, c):
    """Carry ``c`` over ``sp.left`` to a condition over ``sp.right``."""
    if isinstance(c, (TrueC, Constraint)):
        return c
    if isinstance(c, ExistsInt):
        return ExistsInt(c.var, right_along(sp, c.body))
    if isinstance(c, Not):
        return Not(right_along(sp, c.body))
    if isinstance(c, (And, Or)):
        return type(c)(tuple(right_along(sp, i) for i in c.items))
    if isinstance(c, ExistsMorph):
        a = inclusion(sp.left, c.graph)
        pc = pushout_complement(sp.zx, a)
        if pc is None:
            return FALSE
        _, kz, zc = pc
        Y2, _, q = pushout(sp.zy, kz)
        return ExistsMorph(Y2, right_along(Span(zc, q), c.body))
    raise TypeError(f"not a condition: {c!r}")


def right(r: RuleSchema, c):
    return simplify(right_along(rule_span(r), c), r.rhs)


# ---------------------------------------------------------------------------
# weakest liberal result

def wpost(rules, c):
    """Closed condition characterising graphs derivable from a ``c``-graph."""
    rules = list(rules)
    if not rules:
        return FALSE
    parts = []
    for r in rules:
        cf = freshen(c, r)
        body = And((dang(invert(r)), right(r, shift(r, cf))))
        parts.append(exists_ints(r.vars, ExistsMorph(r.rhs, simplify(body, r.rhs))))
    return simplify(Or(tuple(parts)))
