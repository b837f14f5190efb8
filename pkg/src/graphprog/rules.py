"""Rule schemata with relabelling, and how they rewrite host graphs.

A schema is a pair of symbolic graphs whose shared node ids are the
preserved nodes. The interface holds exactly those nodes, unlabelled and
without edges, so every left-hand edge is deleted and every right-hand edge
is created.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Var, eval_label, label_vars, solve_linear
from .graph import Graph, Morphism, inclusion, search_morphisms

__all__ = [
    "RuleSchema", "ConcreteRule", "MatchCandidate", "RuleError",
    "instantiate", "find_matches", "apply", "invert", "derive",
    "dangling_ok", "applicable", "format_rule",
]


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class RuleSchema:
    name: str
    lhs: Graph
    rhs: Graph
    params: tuple = ()
    inverted: bool = False

    @property
    def preserved(self) -> tuple:
        return tuple(sorted(set(self.lhs.nodes) & set(self.rhs.nodes)))

    @property
    def lhs_vars(self) -> set:
        out: set = set()
        for lab in self.lhs.nodes.values():
            out |= label_vars(lab)
        return out

    @property
    def rhs_vars(self) -> set:
        out: set = set()
        for lab in self.rhs.nodes.values():
            out |= label_vars(lab)
        return out

    @property
    def vars(self) -> list:
        """Variables in first-occurrence order (declared parameters first)."""
        seen = list(dict.fromkeys(self.params))
        for g in (self.lhs, self.rhs):
            for v in sorted(g.nodes):
                for x in sorted(label_vars(g.nodes[v])):
                    if x not in seen:
                        seen.append(x)
        return [x for x in seen if x in self.lhs_vars | self.rhs_vars]

    def interface(self) -> Graph:
        return Graph({v: None for v in self.preserved})

    def span(self) -> tuple:
        """``(L, K, R, K->L, K->R)``."""
        K = self.interface()
        return self.lhs, K, self.rhs, inclusion(K, self.lhs), inclusion(K, self.rhs)

    def deleted_nodes(self) -> list:
        return sorted(set(self.lhs.nodes) - set(self.rhs.nodes))

    def created_nodes(self) -> list:
        return sorted(set(self.rhs.nodes) - set(self.lhs.nodes))

    def validate(self) -> "RuleSchema":
        """Check the load-time restrictions; raises :class:`RuleError`."""
        for g in (self.lhs, self.rhs):
            for v, lab in g.nodes.items():
                if lab is None or len(lab) == 0:
                    raise RuleError(f"rule {self.name}: node {v} needs a non-empty label")
        if self.inverted:
            return self
        extra = self.rhs_vars - self.lhs_vars
        if extra:
            raise RuleError(f"rule {self.name}: right-hand variables {sorted(extra)} "
                            "do not occur on the left")
        bare = {i.name for lab in self.lhs.nodes.values() for i in lab if isinstance(i, Var)}
        loose = self.lhs_vars - bare
        if loose:
            raise RuleError(f"rule {self.name}: variables {sorted(loose)} must occur "
                            "as a plain list item on the left")
        undeclared = (self.lhs_vars | self.rhs_vars) - set(self.params)
        if self.params and undeclared:
            raise RuleError(f"rule {self.name}: undeclared variables {sorted(undeclared)}")
        return self


@dataclass(frozen=True)
class ConcreteRule:
    lhs: Graph
    interface: Graph
    rhs: Graph


@dataclass
class MatchCandidate:
    interp: dict
    match: Morphism

    def describe(self) -> str:
        nodes = ", ".join(f"{v}->{w}" for v, w in sorted(self.match.nodes.items()))
        env = ", ".join(f"{k}={v}" for k, v in sorted(self.interp.items()))
        return f"{{{nodes}}}" + (f" with {env}" if env else "")


def instantiate(r: RuleSchema, interp: dict):
    """The concrete rule ``r^I``, or ``None`` if some label is undefined."""
    missing = r.lhs_vars - set(interp)
    if missing:
        raise RuleError(f"interpretation lacks {sorted(missing)}")
    out = []
    for g in (r.lhs, r.rhs):
        nodes = {}
        for v, lab in g.nodes.items():
            val = eval_label(lab, interp)
            if val is None:
                return None
            nodes[v] = val
        out.append(Graph(nodes, g.edges))
    return ConcreteRule(out[0], r.interface(), out[1])


def dangling_ok(L: Graph, preserved, G: Graph, match: Morphism) -> bool:
    """No deleted node keeps an edge outside the match image."""
    image = set(match.edges.values())
    keep = set(preserved)
    for v in L.nodes:
        if v in keep:
            continue
        for e in G.incident(match.nodes[v]):
            if e not in image:
                return False
    return True


def _unify(label, glabel, interp):
    if len(label) != len(glabel):
        return None
    out = interp
    deferred = []
    for item, g in zip(label, glabel):
        if isinstance(item, Var) and item.name not in out:
            out = dict(out)
            out[item.name] = g
        else:
            deferred.append((item, g))
    for item, g in deferred:
        got = eval_label((item,), out)
        if got is None:
            res = solve_linear(item, g, out)
            if res is False:
                return None
            if res is None:
                continue  # settled by the final re-check
            out = dict(out)
            out[res[0]] = res[1]
        elif got[0] != g:
            return None
    return out


def find_matches(r: RuleSchema, G: Graph) -> list:
    """All (interpretation, match) pairs with the dangling condition holding."""
    L = r.lhs

    def node_ok(v, w, interp):
        return _unify(L.nodes[v], G.nodes[w], interp)

    out = []
    for nmap, emap, interp in search_morphisms(L, G, node_ok, {}):
        # labels seen before later bindings may need a final re-check
        if any(eval_label(L.nodes[v], interp) != G.nodes[w] for v, w in nmap.items()):
            continue
        ri = instantiate(r, interp)
        if ri is None:
            continue
        m = Morphism(ri.lhs, G, nmap, emap)
        if not dangling_ok(ri.lhs, r.preserved, G, m):
            continue
        out.append(MatchCandidate(dict(interp), m))
    return out


def apply(r: RuleSchema, G: Graph, m: MatchCandidate) -> tuple:
    """Direct derivation at ``m``; returns ``(H, comatch)``."""
    ri = instantiate(r, m.interp)
    if ri is None:
        raise RuleError("interpretation leaves a label undefined")
    g = Morphism(ri.lhs, G, m.match.nodes, m.match.edges)
    try:
        g.check()
    except ValueError as exc:
        raise RuleError(f"invalid match: {exc}") from None
    if not g.is_injective() or not dangling_ok(ri.lhs, r.preserved, G, g):
        raise RuleError("invalid match: not injective or dangling")
    keep = set(r.preserved)
    del_nodes = {g.nodes[v] for v in ri.lhs.nodes if v not in keep}
    del_edges = set(g.edges.values())
    nodes = {v: lab for v, lab in G.nodes.items() if v not in del_nodes}
    edges = {e: st for e, st in G.edges.items() if e not in del_edges}
    hn = {}
    nxt = max(G.nodes, default=-1) + 1
    for v in sorted(ri.rhs.nodes):
        if v in keep:
            hn[v] = g.nodes[v]
        else:
            hn[v] = nxt
            nxt += 1
        nodes[hn[v]] = ri.rhs.nodes[v]
    he = {}
    nxt = max(G.edges, default=-1) + 1
    for e in sorted(ri.rhs.edges):
        s, t = ri.rhs.edges[e]
        edges[nxt] = (hn[s], hn[t])
        he[e] = nxt
        nxt += 1
    H = Graph(nodes, edges)
    return H, Morphism(ri.rhs, H, hn, he)


def derive(r: RuleSchema, G: Graph) -> list:
    """All ``(H, comatch, match)`` one step away via ``r``."""
    out = []
    for m in find_matches(r, G):
        H, h = apply(r, G, m)
        out.append((H, h, m))
    return out


def applicable(rules, G: Graph) -> bool:
    return any(find_matches(r, G) for r in rules)


def invert(r: RuleSchema) -> RuleSchema:
    name = r.name[:-3] if r.name.endswith("^-1") else r.name + "^-1"
    return RuleSchema(name, r.rhs, r.lhs, r.params, not r.inverted)


def _format_side(g: Graph) -> str:
    from .expr import format_label
    parts = [f"node {v} {format_label(g.nodes[v])};" for v in sorted(g.nodes)]
    parts += [f"edge {s} -> {t};" for s, t in (g.edges[e] for e in sorted(g.edges))]
    return "{ " + " ".join(parts) + " }"


def format_rule(r: RuleSchema) -> str:
    params = ", ".join(r.params or r.vars)
    return f"rule {r.name}({params}) {{ lhs {_format_side(r.lhs)} rhs {_format_side(r.rhs)} }}"
