"""Graphs with partially labelled nodes, and the gluing constructions on them.

Edges all carry the blank label, so an edge is just ``(source, target)``.
Node labels are tuples (see :mod:`graphprog.expr`) or ``None`` for an
unlabelled node. Graphs are treated as immutable once built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .expr import Const, normalize_label

__all__ = [
    "Graph", "Morphism", "MorphismError", "LabelClash",
    "same_label", "label_key", "find_injective_morphisms", "search_morphisms",
    "canonical_key", "isomorphic", "pushout", "pushout_complement",
    "enumerate_overlap_quotients", "identity", "inclusion",
]


class MorphismError(ValueError):
    pass


class LabelClash(ValueError):
    """Two glued nodes carry different labels."""


def _norm(label):
    if label is None:
        return None
    return normalize_label(tuple(Const(i) if isinstance(i, int) else i for i in label))


def same_label(a, b) -> bool:
    """Label equality; symbolic labels are compared in normal form."""
    if a is None or b is None:
        return a is None and b is None
    if len(a) != len(b):
        return False
    if a == b:
        return True
    return _norm(a) == _norm(b)


def label_key(label) -> str:
    if label is None:
        return ""
    if all(isinstance(i, int) for i in label):
        return ":".join(map(str, label))
    return ":".join(map(str, _norm(label)))


class Graph:
    """A finite directed graph.

    ``nodes`` maps node ids to labels (or ``None``); ``edges`` maps edge ids to
    ``(source, target)`` pairs. Ids are small integers local to the graph.
    """

    __slots__ = ("nodes", "edges", "_pairs", "_incident", "_key", "_hash")

    def __init__(self, nodes: Mapping | None = None, edges: Mapping | None = None):
        self.nodes = dict(nodes or {})
        self.edges = dict(edges or {})
        for e, (s, t) in self.edges.items():
            if s not in self.nodes or t not in self.nodes:
                raise ValueError(f"edge {e} has a dangling endpoint")
        self._pairs = None
        self._incident = None
        self._key = None
        self._hash = None

    def __repr__(self) -> str:
        return f"Graph({self.nodes!r}, {self.edges!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self.nodes.items()), frozenset(self.edges.items())))
        return self._hash

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def is_concrete(self) -> bool:
        return all(lab is not None and all(isinstance(i, int) for i in lab)
                   for lab in self.nodes.values())

    def pair_edges(self, s, t) -> list:
        if self._pairs is None:
            pairs: dict = {}
            for e in sorted(self.edges):
                pairs.setdefault(self.edges[e], []).append(e)
            self._pairs = pairs
        return self._pairs.get((s, t), [])

    def incident(self, v) -> set:
        if self._incident is None:
            inc: dict = {n: set() for n in self.nodes}
            for e, (s, t) in self.edges.items():
                inc[s].add(e)
                inc[t].add(e)
            self._incident = inc
        return self._incident[v]

    def fresh_node(self) -> int:
        return max(self.nodes, default=-1) + 1

    def fresh_edge(self) -> int:
        return max(self.edges, default=-1) + 1

    def key(self):
        """Canonical form; equal keys iff isomorphic."""
        if self._key is None:
            self._key = canonical_key(self)
        return self._key

    def format(self) -> str:
        """Host-graph text format."""
        from .expr import format_label
        parts = []
        for v in sorted(self.nodes):
            lab = self.nodes[v]
            parts.append(f"node {v} {format_label(lab)};" if lab is not None else f"node {v};")
        for e in sorted(self.edges):
            s, t = self.edges[e]
            parts.append(f"edge {s} -> {t};")
        return "graph { " + "".join(p + " " for p in parts) + "}"

    def __str__(self) -> str:
        return self.format()


@dataclass
class Morphism:
    dom: Graph
    cod: Graph
    nodes: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)

    def is_injective(self) -> bool:
        return (len(set(self.nodes.values())) == len(self.nodes)
                and len(set(self.edges.values())) == len(self.edges))

    def check(self) -> "Morphism":
        """Raise :class:`MorphismError` unless structure and labels are preserved."""
        dom, cod = self.dom, self.cod
        if set(self.nodes) != set(dom.nodes) or set(self.edges) != set(dom.edges):
            raise MorphismError("morphism is not total")
        for v, w in self.nodes.items():
            if w not in cod.nodes:
                raise MorphismError(f"node {v} maps outside the codomain")
            lab = dom.nodes[v]
            if lab is not None and not same_label(lab, cod.nodes[w]):
                raise MorphismError(f"label of node {v} is not preserved")
        for e, f in self.edges.items():
            if f not in cod.edges:
                raise MorphismError(f"edge {e} maps outside the codomain")
            s, t = dom.edges[e]
            if cod.edges[f] != (self.nodes[s], self.nodes[t]):
                raise MorphismError(f"edge {e}: source/target not preserved")
        return self

    def then(self, other: "Morphism") -> "Morphism":
        """Composite ``other . self``."""
        return Morphism(self.dom, other.cod,
                        {v: other.nodes[w] for v, w in self.nodes.items()},
                        {e: other.edges[f] for e, f in self.edges.items()})


def identity(g: Graph) -> Morphism:
    return Morphism(g, g, {v: v for v in g.nodes}, {e: e for e in g.edges})


def inclusion(sub: Graph, sup: Graph) -> Morphism:
    return Morphism(sub, sup, {v: v for v in sub.nodes}, {e: e for e in sub.edges})


# ---------------------------------------------------------------------------
# backtracking search

def _node_order(P: Graph, fixed) -> list:
    adj: dict = {v: set() for v in P.nodes}
    for s, t in P.edges.values():
        adj[s].add(t)
        adj[t].add(s)
    order: list = []
    seen = set(fixed)
    todo = sorted(v for v in P.nodes if v not in seen)
    while todo:
        frontier = [v for v in todo if adj[v] & seen]
        v = frontier[0] if frontier else todo[0]
        order.append(v)
        seen.add(v)
        todo.remove(v)
    return order


def search_morphisms(P: Graph, G: Graph,
                     node_ok: Callable,
                     state=None,
                     fixed_nodes: Mapping | None = None,
                     fixed_edges: Mapping | None = None) -> Iterator[tuple]:
    """Enumerate injective morphisms ``P -> G`` extending a fixed part.

    ``node_ok(p_node, g_node, state)`` returns the updated state or ``None``
    to reject; fixed nodes are not passed through it. Yields
    ``(node_map, edge_map, state)`` in a deterministic order.
    """
    fixed_nodes = dict(fixed_nodes or {})
    fixed_edges = dict(fixed_edges or {})
    order = _node_order(P, fixed_nodes)
    pcount: dict = {}
    for e, st in P.edges.items():
        if e not in fixed_edges:
            pcount[st] = pcount.get(st, 0) + 1
    gnodes = sorted(G.nodes)
    used_g = set(fixed_nodes.values())
    free_edges = sorted(e for e in P.edges if e not in fixed_edges)
    used_e0 = set(fixed_edges.values())

    def fits(v, w, nmap) -> bool:
        # enough parallel edges between v and every assigned neighbour
        for (s, t), n in pcount.items():
            if s == v or t == v:
                s2 = w if s == v else nmap.get(s)
                t2 = w if t == v else nmap.get(t)
                if s2 is None or t2 is None:
                    continue
                if len(G.pair_edges(s2, t2)) - _fixed_on(s2, t2) < n:
                    return False
        return True

    fixed_pairs: dict = {}
    for f in used_e0:
        fixed_pairs[G.edges[f]] = fixed_pairs.get(G.edges[f], 0) + 1

    def _fixed_on(s, t) -> int:
        return fixed_pairs.get((s, t), 0)

    def edges_rec(i, nmap, emap, used):
        if i == len(free_edges):
            yield dict(emap)
            return
        e = free_edges[i]
        s, t = P.edges[e]
        for f in G.pair_edges(nmap[s], nmap[t]):
            if f in used:
                continue
            emap[e] = f
            used.add(f)
            yield from edges_rec(i + 1, nmap, emap, used)
            used.discard(f)
            del emap[e]

    def nodes_rec(i, nmap, st):
        if i == len(order):
            for emap in edges_rec(0, nmap, dict(fixed_edges), set(used_e0)):
                yield dict(nmap), emap, st
            return
        v = order[i]
        for w in gnodes:
            if w in used_g:
                continue
            if not fits(v, w, nmap):
                continue
            st2 = node_ok(v, w, st)
            if st2 is None:
                continue
            nmap[v] = w
            used_g.add(w)
            yield from nodes_rec(i + 1, nmap, st2)
            used_g.discard(w)
            del nmap[v]

    yield from nodes_rec(0, dict(fixed_nodes), state)


def find_injective_morphisms(P: Graph, G: Graph) -> list:
    """All injective label-preserving morphisms ``P -> G``."""

    def node_ok(v, w, st):
        lab = P.nodes[v]
        if lab is None or same_label(lab, G.nodes[w]):
            return st
        return None

    return [Morphism(P, G, n, e) for n, e, _ in search_morphisms(P, G, node_ok, True)]


# ---------------------------------------------------------------------------
# canonical forms

def _rank(sig: dict) -> dict:
    order = {k: i for i, k in enumerate(sorted(set(sig.values())))}
    return {v: order[k] for v, k in sig.items()}


def _refine(colour: dict, out_nb: dict, in_nb: dict) -> dict:
    """Colour refinement until the number of colours stops growing."""
    while True:
        sig = {v: (colour[v],
                   tuple(sorted(colour[w] for w in out_nb[v])),
                   tuple(sorted(colour[w] for w in in_nb[v])))
               for v in colour}
        new = _rank(sig)
        if len(set(new.values())) == len(set(colour.values())):
            return new
        colour = new


def _twins(u, v, g: Graph, mult: dict) -> bool:
    # swapping u and v is an automorphism
    if g.nodes[u] != g.nodes[v] or mult.get((u, u), 0) != mult.get((v, v), 0):
        return False
    if mult.get((u, v), 0) != mult.get((v, u), 0):
        return False
    return all(mult.get((u, w), 0) == mult.get((v, w), 0)
               and mult.get((w, u), 0) == mult.get((w, v), 0)
               for w in g.nodes if w not in (u, v))


def canonical_key(g: Graph):
    """A hashable key that is equal for exactly the isomorphic graphs.

    Individualisation and refinement: branch on the members of the first
    ambiguous colour class, skipping members interchangeable with one
    already tried, and keep the least encoding.
    """
    nodes = list(g.nodes)
    out_nb: dict = {v: [] for v in nodes}
    in_nb: dict = {v: [] for v in nodes}
    mult: dict = {}
    for s, t in g.edges.values():
        out_nb[s].append(t)
        in_nb[t].append(s)
        mult[(s, t)] = mult.get((s, t), 0) + 1
    labels = {v: (g.nodes[v] is None, label_key(g.nodes[v])) for v in nodes}
    colour = _refine(_rank(labels), out_nb, in_nb)
    edges = list(g.edges.values())
    best = [None]

    def search(colour):
        cells: dict = {}
        for v, c in colour.items():
            cells.setdefault(c, []).append(v)
        open_ = [c for c in sorted(cells) if len(cells[c]) > 1]
        if not open_:
            enc = (tuple(labels[v] for v in sorted(nodes, key=colour.get)),
                   tuple(sorted((colour[s], colour[t]) for s, t in edges)))
            if best[0] is None or enc < best[0]:
                best[0] = enc
            return
        cell = sorted(cells[open_[0]], key=repr)
        reps: list = []
        for v in cell:
            if any(_twins(v, r, g, mult) for r in reps):
                continue
            reps.append(v)
            # split v off below the rest of its cell
            ind = {w: (2 * c + (0 if c != colour[v] or w == v else 1)) for w, c in colour.items()}
            search(_refine(_rank(ind), out_nb, in_nb))

    search(colour)
    return best[0]


def isomorphic(g: Graph, h: Graph) -> bool:
    if len(g.nodes) != len(h.nodes) or len(g.edges) != len(h.edges):
        return False
    return g.key() == h.key()


# ---------------------------------------------------------------------------
# gluing

def _merge_labels(a, b):
    if a is None:
        return b
    if b is None or same_label(a, b):
        return a
    raise LabelClash(f"cannot glue labels {a} and {b}")


def pushout(p: Morphism, a: Morphism) -> tuple:
    """Glue ``p.cod`` and ``a.cod`` along the common domain.

    Returns ``(C2, a2, q)`` with ``a2: p.cod -> C2`` an inclusion (the ids of
    ``p.cod`` are kept) and ``q: a.cod -> C2``. An unlabelled node glued to a
    labelled one takes the defined label.
    """
    Pp, C = p.cod, a.cod
    back = {w: v for v, w in a.nodes.items()}
    back_e = {f: e for e, f in a.edges.items()}
    nodes = dict(Pp.nodes)
    qn: dict = {}
    nxt = Pp.fresh_node()
    for w in sorted(C.nodes):
        if w in back:
            tgt = p.nodes[back[w]]
            nodes[tgt] = _merge_labels(nodes[tgt], C.nodes[w])
            qn[w] = tgt
        else:
            qn[w] = nxt
            nodes[nxt] = C.nodes[w]
            nxt += 1
    edges = dict(Pp.edges)
    qe: dict = {}
    nxt = Pp.fresh_edge()
    for f in sorted(C.edges):
        if f in back_e:
            qe[f] = p.edges[back_e[f]]
        else:
            s, t = C.edges[f]
            edges[nxt] = (qn[s], qn[t])
            qe[f] = nxt
            nxt += 1
    C2 = Graph(nodes, edges)
    return C2, inclusion(Pp, C2), Morphism(C, C2, qn, qe)


def pushout_complement(k: Morphism, a: Morphism):
    """Natural pushout complement of ``k: K -> L`` and ``a: L -> X``.

    Returns ``(Z, K -> Z, Z -> X)``, or ``None`` when the dangling condition
    fails. Nodes in the image of ``K`` take their labels from ``K``.
    """
    K, L, X = k.dom, k.cod, a.cod
    kept_nodes = set(k.nodes.values())
    kept_edges = set(k.edges.values())
    del_nodes = {a.nodes[v] for v in L.nodes if v not in kept_nodes}
    del_edges = {a.edges[e] for e in L.edges if e not in kept_edges}
    image_edges = set(a.edges.values())
    for e, (s, t) in X.edges.items():
        if e not in image_edges and (s in del_nodes or t in del_nodes):
            return None
    nodes = {v: lab for v, lab in X.nodes.items() if v not in del_nodes}
    for kv, lv in k.nodes.items():
        nodes[a.nodes[lv]] = K.nodes[kv]
    edges = {e: st for e, st in X.edges.items() if e not in del_edges}
    Z = Graph(nodes, edges)
    kz = Morphism(K, Z, {kv: a.nodes[lv] for kv, lv in k.nodes.items()},
                  {ke: a.edges[le] for ke, le in k.edges.items()})
    return Z, kz, inclusion(Z, X)


def _compatible(a, b) -> bool:
    return a is None or b is None or same_label(a, b)


def _matchings(items, options) -> Iterator[dict]:
    """Partial injective assignments item -> option (unassigned first)."""
    items = list(items)

    def rec(i, used, cur):
        if i == len(items):
            yield dict(cur)
            return
        x = items[i]
        yield from rec(i + 1, used, cur)
        for y in options.get(x, ()):
            if y in used:
                continue
            cur[x] = y
            used.add(y)
            yield from rec(i + 1, used, cur)
            used.discard(y)
            del cur[x]

    yield from rec(0, set(), {})


def enumerate_overlap_quotients(a2: Morphism, q: Morphism) -> list:
    """All quotients ``e: C2 -> E`` keeping ``e.a2`` and ``e.q`` injective.

    Only an item of ``a2``'s image outside ``q``'s image may be merged with an
    item of ``q``'s image outside ``a2``'s image, and merged nodes must carry
    compatible labels. Returns ``[(E, b, s)]`` with ``b`` an inclusion of
    ``a2.dom`` and the identity quotient first.
    """
    C2 = a2.cod
    A, Q = set(a2.nodes.values()), set(q.nodes.values())
    left, right = sorted(A - Q), sorted(Q - A)
    opts = {w: [u for u in left if _compatible(C2.nodes[u], C2.nodes[w])] for w in right}
    Ae, Qe = set(a2.edges.values()), set(q.edges.values())
    left_e, right_e = sorted(Ae - Qe), sorted(Qe - Ae)
    out = []
    for nm in _matchings(right, opts):
        f = {v: nm.get(v, v) for v in C2.nodes}
        eopts = {}
        for e2 in right_e:
            s, t = C2.edges[e2]
            eopts[e2] = [e1 for e1 in left_e if C2.edges[e1] == (f[s], f[t])]
        for em in _matchings(right_e, eopts):
            nodes = {}
            for v, lab in C2.nodes.items():
                if v in nm:
                    continue
                nodes[v] = lab
            for w, u in nm.items():
                nodes[u] = _merge_labels(C2.nodes[u], C2.nodes[w])
            fe = {e: em.get(e, e) for e in C2.edges}
            edges = {e: (f[s], f[t]) for e, (s, t) in C2.edges.items() if e not in em}
            E = Graph(nodes, edges)
            b = Morphism(a2.dom, E, {v: f[w] for v, w in a2.nodes.items()},
                         {x: fe[y] for x, y in a2.edges.items()})
            s_ = Morphism(q.dom, E, {v: f[w] for v, w in q.nodes.items()},
                          {x: fe[y] for x, y in q.edges.items()})
            out.append((E, b, s_))
    return out
