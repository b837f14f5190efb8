"""Tokenizer and recursive-descent parsers for every text format.

One file may mix statements::

    use "other.grs";
    rule init(x) { lhs { node 1 x; } rhs { node 1 x:0; } }
    graph tri { node 1 1; node 2 2; edge 1 -- 2; }
    define c = ex int a . ex { node 1 a; };
    proof p = (rule RuleSetFail conclusion: [not app(init)] init [er: not app(init)])

``--`` always means a pair of opposite edges.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from .econd import (
    FALSE, TRUE, And, Constraint, ExistsInt, ExistsMorph, Not, Or, TrueC,
    exists_ints, forall_ints, implies,
)
from .expr import BinOp, Cmp, Const, Neg, Var, eval_expr
from .graph import Graph
from .program import Bang, IfElse, RuleSet, Seq
from .rules import RuleError, RuleSchema

__all__ = [
    "ParseError", "Workspace", "tokenize", "parse_expr", "parse_label",
    "parse_graph", "parse_program", "parse_condition", "parse_triple",
    "parse_rules", "builtin_rules", "BUILTIN_RULES",
]


class ParseError(ValueError):
    def __init__(self, msg, line=0, col=0, source="<input>"):
        super().__init__(f"{source}:{line}:{col}: {msg}")
        self.line, self.col, self.source = line, col, source


@dataclass(frozen=True)
class Tok:
    kind: str
    value: object
    line: int
    col: int


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(//|\#)[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*(\^-1)?)
  | (?P<str>"[^"\n]*")
  | (?P<op>->|--|=>|!=|<=|>=|[{}()\[\];,.:!=<>+\-*/|])
""", re.VERBOSE)


def tokenize(text: str, source="<input>") -> list:
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1, source)
        kind = m.lastgroup
        val = m.group()
        col = pos - start + 1
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind == "int":
            out.append(Tok("int", int(val), line, col))
        elif kind == "id":
            out.append(Tok("id", val, line, col))
        elif kind == "str":
            out.append(Tok("str", val[1:-1], line, col))
        elif kind == "op":
            out.append(Tok("op", val, line, col))
        pos = m.end()
    out.append(Tok("eof", None, line, pos - start + 1))
    return out


_CMP = ("=", "!=", "<", "<=", ">", ">=")
_KEYWORDS = {"ex", "all", "int", "not", "and", "or", "true", "false", "node", "edge",
             "if", "then", "else", "extends", "hint", "child", "conclusion", "ok", "er"}


class _Parser:
    def __init__(self, text, source="<input>", ws=None):
        self.toks = tokenize(text, source)
        self.i = 0
        self.source = source
        self.ws = ws if ws is not None else Workspace()
        self.scope: list = []  # names of enclosing named graphs

    # -- token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col, self.source)

    def at(self, value) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.value == value

    def accept(self, value) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            got = self.tok.value if self.tok.kind != "eof" else "end of input"
            raise self.error(f"expected {value!r}, got {got!r}")

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id":
            raise self.error(f"expected a name, got {t.value!r}")
        self.i += 1
        return t.value

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    # -- expressions
    def expr(self):
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.value
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.at("*") or self.at("/"):
            op = self.tok.value
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.accept("-"):
            arg = self.unary()
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Neg(arg)
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Const(t.value)
        if t.kind == "id" and t.value not in _KEYWORDS:
            self.i += 1
            return Var(t.value)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"expected an expression, got {t.value!r}")

    def label(self) -> tuple:
        items = [self.expr()]
        while self.accept(":"):
            items.append(self.expr())
        return tuple(items)

    # -- graph bodies
    def node_ref(self) -> str:
        t = self.tok
        if t.kind not in ("int", "id"):
            raise self.error("expected a node identifier")
        self.i += 1
        return str(t.value)

    def graph_items(self, nodes: dict, edges: dict, table: dict, *, labels="optional",
                    ctx: Graph | None = None, reserved=frozenset()):
        """Parse ``{ node ...; edge ...; }`` into ``nodes``/``edges`` in place.

        ``ctx`` holds inherited nodes that may be restated or relabelled;
        fresh ids avoid ``reserved``.
        """
        self.expect("{")
        while not self.accept("}"):
            if self.accept("node"):
                tok = self.tok
                ref = self.node_ref()
                lab = None
                if not self.at(";"):
                    lab = self.label()
                elif labels == "required":
                    raise self.error("node needs a label", tok)
                self.expect(";")
                if ref in table:
                    v = table[ref]
                    if ctx is not None and v in ctx.nodes:
                        old = ctx.nodes[v]
                        if lab is not None:
                            if old is not None and old != lab:
                                raise self.error(f"node {ref} already has a label", tok)
                            nodes[v] = lab
                    elif v in nodes:
                        raise self.error(f"node {ref} declared twice", tok)
                    else:
                        nodes[v] = lab
                else:
                    taken = set(nodes) | set(reserved)
                    v = int(ref) if ref.isdigit() else max(taken, default=-1) + 1
                    while v in taken:
                        v += 1
                    table[ref] = v
                    nodes[v] = lab
            elif self.accept("edge"):
                tok = self.tok
                s = self.node_ref()
                if self.accept("->"):
                    both = False
                elif self.accept("--"):
                    both = True
                else:
                    raise self.error("expected '->' or '--'")
                t = self.node_ref()
                self.expect(";")
                for ref in (s, t):
                    if ref not in table or table[ref] not in nodes:
                        raise self.error(f"unknown node {ref}", tok)
                e = max(edges, default=-1) + 1
                edges[e] = (table[s], table[t])
                if both:
                    edges[e + 1] = (table[t], table[s])
            else:
                raise self.error(f"expected 'node' or 'edge', got {self.tok.value!r}")

    def host_graph(self) -> Graph:
        nodes: dict = {}
        edges: dict = {}
        self.graph_items(nodes, edges, {}, labels="required")
        out = {}
        for v, lab in nodes.items():
            vals = tuple(eval_expr(i, {}) for i in lab)
            if any(x is None for x in vals):
                raise self.error(f"host graph label {lab} is not constant")
            out[v] = vals
        return Graph(out, edges)

    # -- rules
    def rule(self) -> RuleSchema:
        tok = self.tok
        name = self.ident()
        params: list = []
        if self.accept("("):
            if not self.at(")"):
                params.append(self.ident())
                while self.accept(","):
                    params.append(self.ident())
            self.expect(")")
        self.expect("{")
        table: dict = {}
        self.expect("lhs")
        ln, le = {}, {}
        self.graph_items(ln, le, table, labels="required")
        self.expect("rhs")
        rn, re_ = {}, {}
        # ids mentioned on both sides are the preserved nodes
        self.graph_items(rn, re_, dict(table), labels="required", reserved=set(ln))
        self.expect("}")
        try:
            return RuleSchema(name, Graph(ln, le), Graph(rn, re_), tuple(params)).validate()
        except (RuleError, ValueError) as exc:
            raise self.error(str(exc), tok) from None

    # -- programs
    def ruleset(self) -> RuleSet:
        if self.accept("{"):
            names = [self.rule_name()]
            while self.accept(","):
                names.append(self.rule_name())
            self.expect("}")
            return RuleSet(tuple(names))
        return RuleSet((self.rule_name(),))

    def rule_name(self) -> str:
        tok = self.tok
        name = self.ident()
        if name in _KEYWORDS:
            raise self.error(f"unexpected {name!r}", tok)
        if self.ws.check_rules and name not in self.ws.rules:
            raise self.error(f"unknown rule {name!r}", tok)
        return name

    def program(self):
        p = self.prog_item()
        while self.at(";") and self._starts_item(self.peek()):
            self.i += 1
            p = Seq(p, self.prog_item())
        return p

    @staticmethod
    def _starts_item(t: Tok) -> bool:
        if t.kind == "op":
            return t.value in ("{", "(")
        return t.kind == "id" and (t.value == "if" or t.value not in _KEYWORDS)

    def prog_item(self):
        if self.accept("if"):
            guard = self.ruleset()
            self.expect("then")
            then = self.program()
            self.expect("else")
            return IfElse(guard, then, self.prog_item())
        if self.accept("("):
            p = self.program()
            self.expect(")")
            return p
        rs = self.ruleset()
        if self.accept("!"):
            return Bang(rs)
        return rs

    # -- conditions
    def condition(self, ctx: Graph, table: dict):
        left = self.disjunction(ctx, table)
        if self.accept("=>"):
            return implies(left, self.condition(ctx, table))
        return left

    def disjunction(self, ctx, table):
        items = [self.conjunction(ctx, table)]
        while self.accept("or"):
            items.append(self.conjunction(ctx, table))
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conjunction(self, ctx, table):
        items = [self.negation(ctx, table)]
        while self.accept("and"):
            items.append(self.negation(ctx, table))
        return items[0] if len(items) == 1 else And(tuple(items))

    def negation(self, ctx, table):
        if self.accept("not"):
            return Not(self.negation(ctx, table))
        if self.at("ex") or self.at("all"):
            universal = self.tok.value == "all"
            self.i += 1
            if self.accept("int"):
                names = [self.ident()]
                while self.accept(","):
                    names.append(self.ident())
                self.expect(".")
                body = self.condition(ctx, table)
                return forall_ints(names, body) if universal else exists_ints(names, body)
            name, graph, inner = self.graph_ref(ctx, table)
            self.scope.append(name)
            if self.accept("."):
                body = self.condition(graph, inner)
            elif universal:
                raise self.error("'all' over a graph needs a body")
            else:
                body = TRUE
            self.scope.pop()
            if universal:
                return Not(ExistsMorph(graph, Not(body)))
            return ExistsMorph(graph, body)
        return self.atom(ctx, table)

    def graph_ref(self, ctx: Graph, table: dict):
        name = None
        if self.tok.kind == "id" and self.peek().kind == "op" and self.peek().value == "{":
            name = self.ident()
        nodes = dict(ctx.nodes)
        edges = dict(ctx.edges)
        inner = dict(table)
        self.graph_items(nodes, edges, inner, ctx=ctx)
        if self.accept("extends"):
            base = self.ident()
            if base not in self.scope:
                raise self.error(f"'extends {base}' does not name an enclosing graph")
        return name, Graph(nodes, edges), inner

    def atom(self, ctx, table):
        t = self.tok
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if t.kind == "id" and t.value in ("app", "wpost") and self.peek().value == "(":
            return self.macro(ctx)
        if t.kind == "id" and t.value in self.ws.defs and not self._starts_comparison(1):
            self.i += 1
            return _embed(self.ws.defs[t.value], ctx)
        if self.at("("):
            save = self.i
            try:
                return self.comparison()
            except ParseError:
                self.i = save
            self.expect("(")
            c = self.condition(ctx, table)
            self.expect(")")
            return c
        if t.kind in ("int", "id") or self.at("-"):
            if t.kind == "id" and t.value not in self.ws.defs and not self._starts_comparison(1):
                raise self.error(f"unknown condition name {t.value!r}")
            return self.comparison()
        raise self.error(f"unexpected {t.value!r} in condition")

    def _starts_comparison(self, k) -> bool:
        nxt = self.peek(k)
        return nxt.kind == "op" and nxt.value in _CMP + ("+", "-", "*", "/")

    def comparison(self):
        left = self.expr()
        if not (self.tok.kind == "op" and self.tok.value in _CMP):
            raise self.error("expected a comparison operator")
        op = self.tok.value
        self.i += 1
        return Constraint(Cmp(op, left, self.expr()))

    def macro(self, ctx):
        from .transform import app, wpost
        kind = self.ident()
        self.expect("(")
        rs = self.ruleset()
        try:
            rules = [self.ws.rules[n] for n in rs.names]
        except KeyError as exc:
            raise self.error(f"unknown rule {exc.args[0]!r}") from None
        if kind == "app":
            self.expect(")")
            return _embed(app(rules), ctx)
        self.expect(",")
        c = self.condition(Graph(), {})
        self.expect(")")
        return _embed(wpost(rules, c), ctx)

    # -- triples and proofs
    def triple(self):
        from .proof import Triple
        self.expect("[")
        pre = self.condition(Graph(), {})
        self.expect("]")
        prog = self.program()
        self.expect("[")
        if self.accept("ok"):
            exit_ = "ok"
        elif self.accept("er"):
            exit_ = "er"
        else:
            raise self.error("expected 'ok' or 'er'")
        self.expect(":")
        post = self.condition(Graph(), {})
        self.expect("]")
        return Triple(pre, prog, exit_, post)

    def proof(self):
        from .proof import ProofNode
        start = self.tok
        self.expect("(")
        self.expect("rule")
        rule = self.ident()
        concl = None
        hints, children = [], []
        while not self.accept(")"):
            if self.accept("conclusion"):
                self.expect(":")
                concl = self.triple()
            elif self.accept("hint"):
                self.expect(":")
                hints.append(self.condition(Graph(), {}))
            elif self.accept("child"):
                self.expect(":")
                children.append(self.proof())
            else:
                raise self.error(f"expected 'conclusion', 'hint' or 'child', got {self.tok.value!r}")
        if concl is None:
            raise self.error("proof node without a conclusion", start)
        return ProofNode(rule, concl, tuple(children), tuple(hints), (start.line, start.col))

    # -- documents
    def document(self):
        while not self.at_end():
            tok = self.tok
            if self.accept("use"):
                if self.tok.kind != "str":
                    raise self.error("expected a quoted file name")
                path = self.tok.value
                self.i += 1
                self.expect(";")
                base = os.path.dirname(self.source) if self.source != "<input>" else "."
                self.ws.load(os.path.join(base, path))
            elif self.accept("rule"):
                r = self.rule()
                self.ws.rules[r.name] = r
            elif self.accept("graph"):
                name = "graph"
                if self.tok.kind == "id":
                    name = self.ident()
                self.ws.graphs[name] = self.host_graph()
                self.accept(";")
            elif self.accept("define"):
                name = self.ident()
                self.expect("=")
                self.ws.defs[name] = self.condition(Graph(), {})
                self.expect(";")
            elif self.accept("proof"):
                name = self.ident()
                self.expect("=")
                self.ws.proofs[name] = self.proof()
                self.accept(";")
            elif self.at("("):
                self.ws.proofs[f"proof{len(self.ws.proofs) + 1}"] = self.proof()
            elif self.accept("program"):
                name = self.ident()
                self.expect("=")
                self.ws.programs[name] = self.program()
                self.expect(";")
            else:
                raise self.error(f"unexpected {tok.value!r} at top level")


def _embed(c, ctx: Graph):
    """Read a closed condition inside context ``ctx``."""
    if not ctx.nodes:
        return c
    dn = max(ctx.nodes) + 1
    de = max(ctx.edges, default=-1) + 1

    def walk(x):
        if isinstance(x, ExistsMorph):
            g = x.graph
            nodes = dict(ctx.nodes)
            nodes.update({v + dn: lab for v, lab in g.nodes.items()})
            edges = dict(ctx.edges)
            edges.update({e + de: (s + dn, t + dn) for e, (s, t) in g.edges.items()})
            return ExistsMorph(Graph(nodes, edges), walk(x.body), x.name)
        if isinstance(x, ExistsInt):
            return ExistsInt(x.var, walk(x.body))
        if isinstance(x, Not):
            return Not(walk(x.body))
        if isinstance(x, (And, Or)):
            return type(x)(tuple(walk(i) for i in x.items))
        return x

    return walk(c)


@dataclass
class Workspace:
    """Everything loaded from rule, graph, condition and proof files."""
    rules: dict = field(default_factory=dict)
    graphs: dict = field(default_factory=dict)
    defs: dict = field(default_factory=dict)
    proofs: dict = field(default_factory=dict)
    programs: dict = field(default_factory=dict)
    check_rules: bool = True
    loaded: set = field(default_factory=set)

    def load(self, path: str) -> "Workspace":
        path = os.path.normpath(path)
        if path in self.loaded:
            return self
        self.loaded.add(path)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read file: {exc.strerror}", 0, 0, path) from None
        self.load_text(text, path)
        return self

    def load_text(self, text: str, source="<input>") -> "Workspace":
        _Parser(text, source, self).document()
        return self

    def rule_list(self, names) -> list:
        out = []
        for n in names:
            if n not in self.rules:
                raise KeyError(f"unknown rule {n!r}")
            out.append(self.rules[n])
        return out


def _one(text, source, ws, method, *args):
    p = _Parser(text, source, ws)
    out = getattr(p, method)(*args)
    if not p.at_end():
        raise p.error(f"unexpected trailing {p.tok.value!r}")
    return out


def parse_expr(text: str):
    return _one(text, "<input>", None, "expr")


def parse_label(text: str) -> tuple:
    return _one(text, "<input>", None, "label")


def parse_graph(text: str, source="<input>") -> Graph:
    """A host graph; the ``graph`` keyword and a name are optional."""
    p = _Parser(text, source)
    p.accept("graph")
    if p.tok.kind == "id":
        p.ident()
    g = p.host_graph()
    p.accept(";")
    if not p.at_end():
        raise p.error(f"unexpected trailing {p.tok.value!r}")
    return g


def parse_rules(text: str, source="<input>") -> dict:
    ws = Workspace()
    ws.load_text(text, source)
    return ws.rules


def parse_program(text: str, env=None, source="<input>"):
    ws = Workspace(rules=dict(env or {}), check_rules=env is not None)
    return _one(text, source, ws, "program")


def parse_condition(text: str, ws: Workspace | None = None, source="<input>"):
    return _one(text, source, ws or Workspace(), "condition", Graph(), {})


def parse_triple(text: str, ws: Workspace | None = None, source="<input>"):
    return _one(text, source, ws or Workspace(), "triple")


BUILTIN_RULES = """
rule init(x) { lhs { node 1 x; } rhs { node 1 x:0; } }
rule colour(x, i, y) {
  lhs { node 1 x:i; node 2 y; edge 1 -- 2; }
  rhs { node 1 x:i; node 2 y:i+1; edge 1 -- 2; }
}
rule delete(x) { lhs { node 1 x; } rhs { } }
rule edge_add(x, y) { lhs { node 1 x; node 2 y; } rhs { node 1 x; node 2 y; edge 1 -> 2; } }
rule loop_add(x) { lhs { node 1 x; } rhs { node 1 x; edge 1 -> 1; } }
rule add() { lhs { } rhs { node 1 0; } }
rule nop() { lhs { } rhs { } }
"""


def builtin_rules() -> dict:
    """The colouring rules plus small rules used by the test suites."""
    return parse_rules(BUILTIN_RULES, "<builtin>")
