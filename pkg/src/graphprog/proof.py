"""Proof trees for incorrectness triples, and their checker.

Axiom conclusions are compared structurally after simplification (up to
renaming of bound variables). Implications required by ``Cons`` and
``IterVar`` go to :func:`discharge_implication`, which first tries a small
syntactic fragment and then searches a finite universe for a counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .econd import (
    FALSE, TRUE, And, Not, Or, SatConfig, alpha_equal, format_condition, holds,
    simplify,
)
from .program import Bang, IfElse, RuleSet, Seq
from .transform import app, wpost

__all__ = [
    "Triple", "ProofNode", "Valid", "ValidUpToBound", "Rejected",
    "Syntactic", "BoundedValid", "Refuted", "DischargeConfig",
    "check_proof", "discharge_implication", "implies_syntactically",
    "RULE_ARITY", "format_triple",
]


@dataclass(frozen=True)
class Triple:
    pre: object
    program: object
    exit: str
    post: object

    def __post_init__(self):
        if self.exit not in ("ok", "er"):
            raise ValueError(f"exit must be 'ok' or 'er', not {self.exit!r}")

    def __str__(self):
        return format_triple(self)


def format_triple(t: Triple) -> str:
    return f"[{format_condition(t.pre)}] {t.program} [{t.exit}: {format_condition(t.post)}]"


@dataclass(frozen=True)
class ProofNode:
    rule: str
    conclusion: Triple
    children: tuple = ()
    hints: tuple = ()
    where: tuple = (0, 0)  # line, column in the source script


RULE_ARITY = {
    "RuleSetSucc": 0, "RuleSetFail": 0, "SeqSucc": 2, "SeqFail": 1,
    "IfElse": 2, "Cons": 1, "IterZero": 0, "Iter": 1, "IterVar": None,
}


# ---------------------------------------------------------------------------
# verdicts

@dataclass(frozen=True)
class Valid:
    def __str__(self):
        return "Valid"


@dataclass(frozen=True)
class ValidUpToBound:
    bound: str
    obligations: tuple

    def __str__(self):
        lines = [f"ValidUpToBound ({self.bound})"]
        lines += [f"  bounded: {a} => {b}" for a, b in self.obligations]
        return "\n".join(lines)


@dataclass(frozen=True)
class Rejected:
    node: ProofNode
    reason: str

    @property
    def step(self) -> str:
        line, col = self.node.where
        return f"{self.node.rule} at {line}:{col}"

    def __str__(self):
        return f"Rejected at {self.step}: {self.reason}"


@dataclass(frozen=True)
class Syntactic:
    pass


@dataclass(frozen=True)
class BoundedValid:
    bound: str


@dataclass(frozen=True)
class Refuted:
    counterexample: object


@dataclass(frozen=True)
class DischargeConfig:
    """Bounds for the fallback search of implication obligations."""
    max_nodes: int = 3
    labels: tuple = ((0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1))
    max_parallel: int = 1
    sat: SatConfig = field(default_factory=lambda: SatConfig(warn_unanchored=False))

    def describe(self) -> str:
        labs = ",".join(":".join(map(str, lab)) for lab in self.labels)
        return f"graphs up to {self.max_nodes} nodes, labels {{{labs}}}, {self.max_parallel} parallel edges"


# ---------------------------------------------------------------------------
# implications

def _conjuncts(c) -> tuple:
    return c.items if isinstance(c, And) else (c,)


def _disjuncts(c) -> tuple:
    return c.items if isinstance(c, Or) else (c,)


def _is_false(c) -> bool:
    return isinstance(c, Not) and c.body == TRUE


def _implies(a, b, depth) -> bool:
    if _is_false(a) or b == TRUE or alpha_equal(a, b):
        return True
    if depth == 0:
        return False
    if isinstance(b, And) and all(_implies(a, x, depth - 1) for x in b.items):
        return True
    if isinstance(a, Or) and all(_implies(x, b, depth - 1) for x in a.items):
        return True
    if isinstance(a, And) and any(_implies(x, b, depth - 1) for x in a.items):
        return True
    if isinstance(b, Or) and any(_implies(a, x, depth - 1) for x in b.items):
        return True
    return False


def implies_syntactically(a, b) -> bool:
    """Sound but incomplete: reflexivity, false/true, conjunct dropping and
    disjunct introduction, combined structurally."""
    return _implies(simplify(a), simplify(b), 4)


def discharge_implication(a, b, cfg: DischargeConfig | None = None):
    """Decide ``a => b`` syntactically, else search for a refuting graph."""
    cfg = cfg or DischargeConfig()
    if implies_syntactically(a, b):
        return Syntactic()
    from .oracle import Universe, enumerate_graphs
    u = Universe(cfg.max_nodes, cfg.labels, cfg.max_parallel)
    for G in enumerate_graphs(u):
        if holds(G, a, cfg.sat) and not holds(G, b, cfg.sat):
            return Refuted(G)
    return BoundedValid(cfg.describe())


# ---------------------------------------------------------------------------
# checking

class _Reject(Exception):
    def __init__(self, node, reason):
        self.node, self.reason = node, reason


def _same(a, b) -> bool:
    return alpha_equal(simplify(a), simplify(b))


class _Checker:
    def __init__(self, env, cfg: DischargeConfig):
        self.env = env
        self.cfg = cfg
        self.bounded: list = []
        self._app: dict = {}
        self._discharged: dict = {}

    def rules(self, node, rs: RuleSet) -> list:
        try:
            return [self.env[n] for n in rs.names]
        except KeyError as exc:
            raise _Reject(node, f"unknown rule {exc.args[0]!r}") from None

    def app(self, node, rs: RuleSet):
        if rs.names not in self._app:
            self._app[rs.names] = simplify(app(self.rules(node, rs)))
        return self._app[rs.names]

    def split(self, node, c, target, what):
        """Read ``c`` as ``rest and target``; returns ``rest``."""
        if target == TRUE:
            return simplify(c)
        items = list(_conjuncts(simplify(c)))
        for i, x in enumerate(items):
            if alpha_equal(x, target):
                rest = items[:i] + items[i + 1:]
                if not rest:
                    return TRUE
                return rest[0] if len(rest) == 1 else And(tuple(rest))
        raise _Reject(node, f"{what} {format_condition(c)} has no conjunct "
                            f"{format_condition(target)}")

    def obligation(self, node, a, b):
        key = (simplify(a), simplify(b))
        if key not in self._discharged:
            self._discharged[key] = discharge_implication(a, b, self.cfg)
        res = self._discharged[key]
        if isinstance(res, Refuted):
            raise _Reject(node, f"implication {format_condition(a)} => {format_condition(b)} "
                                f"fails on {res.counterexample.format()}")
        if isinstance(res, BoundedValid):
            pair = (format_condition(simplify(a)), format_condition(simplify(b)))
            if pair not in self.bounded:
                self.bounded.append(pair)

    def expect_program(self, node, kind):
        p = node.conclusion.program
        if not isinstance(p, kind):
            raise _Reject(node, f"{node.rule} needs a {kind.__name__} program, got {p}")
        return p

    def require(self, node, ok, reason):
        if not ok:
            raise _Reject(node, reason)

    def check(self, node: ProofNode):
        arity = RULE_ARITY.get(node.rule, -1)
        if arity == -1:
            raise _Reject(node, f"unknown proof rule {node.rule!r}")
        if arity is not None and len(node.children) != arity:
            raise _Reject(node, f"{node.rule} takes {arity} premises, got {len(node.children)}")
        getattr(self, "rule_" + node.rule)(node)
        for child in node.children:
            self.check(child)

    # -- axioms
    def rule_RuleSetSucc(self, node):
        t = node.conclusion
        rs = self.expect_program(node, RuleSet)
        c = self.split(node, t.pre, self.app(node, rs), "presumption")
        if t.exit == "er":
            self.require(node, _same(t.post, FALSE), "er result must be false")
            return
        want = wpost(self.rules(node, rs), c)
        self.require(node, _same(t.post, want),
                     f"result is not WPost({rs}, {format_condition(c)}) = {format_condition(want)}")

    def rule_RuleSetFail(self, node):
        t = node.conclusion
        rs = self.expect_program(node, RuleSet)
        self.split(node, t.pre, simplify(Not(self.app(node, rs))), "presumption")
        if t.exit == "ok":
            self.require(node, _same(t.post, FALSE), "ok result must be false")
            return
        self.require(node, _same(t.post, t.pre), "er result must equal the presumption")

    def rule_IterZero(self, node):
        t = node.conclusion
        loop = self.expect_program(node, Bang)
        self.split(node, t.pre, simplify(Not(self.app(node, loop.body))), "presumption")
        if t.exit == "er":
            self.require(node, _same(t.post, FALSE), "er result must be false")
            return
        self.require(node, _same(t.post, t.pre), "ok result must equal the presumption")

    # -- composite rules
    def rule_SeqSucc(self, node):
        t = node.conclusion
        p = self.expect_program(node, Seq)
        left, right = node.children
        a, b = left.conclusion, right.conclusion
        self.require(node, a.program == p.first and b.program == p.second,
                     "premise programs do not split the sequence")
        self.require(node, a.exit == "ok", "first premise must have exit ok")
        self.require(node, b.exit == t.exit, "second premise has the wrong exit")
        self.require(node, _same(a.pre, t.pre), "first premise presumption differs")
        self.require(node, _same(a.post, b.pre),
                     "first premise result differs from second premise presumption")
        self.require(node, _same(b.post, t.post), "second premise result differs")
        for e in node.hints:
            self.require(node, _same(e, a.post), "mid-condition hint differs from the premises")

    def rule_SeqFail(self, node):
        t = node.conclusion
        p = self.expect_program(node, Seq)
        (child,) = node.children
        a = child.conclusion
        self.require(node, t.exit == "er" and a.exit == "er", "SeqFail needs exit er")
        self.require(node, a.program == p.first, "premise program is not the first component")
        self.require(node, _same(a.pre, t.pre) and _same(a.post, t.post),
                     "premise triple differs")

    def rule_IfElse(self, node):
        t = node.conclusion
        p = self.expect_program(node, IfElse)
        yes, no = (ch.conclusion for ch in node.children)
        ap = self.app(node, p.guard)
        self.require(node, yes.program == p.then and no.program == p.orelse,
                     "premise programs do not match the branches")
        self.require(node, yes.exit == t.exit and no.exit == t.exit, "premise exits differ")
        self.require(node, _same(yes.pre, And((t.pre, ap))),
                     "then-premise presumption is not c and App(guard)")
        self.require(node, _same(no.pre, And((t.pre, Not(ap)))),
                     "else-premise presumption is not c and not App(guard)")
        self.require(node, _same(yes.post, t.post) and _same(no.post, t.post),
                     "premise results differ from the conclusion")

    def rule_Cons(self, node):
        t = node.conclusion
        (child,) = node.children
        a = child.conclusion
        self.require(node, a.program == t.program and a.exit == t.exit,
                     "premise program or exit differs")
        if node.hints:
            self.require(node, len(node.hints) == 2, "Cons hints are c' and d'")
            self.require(node, _same(node.hints[0], a.pre) and _same(node.hints[1], a.post),
                         "hints differ from the premise")
        # premise presumption implies ours; our result implies the premise's
        self.obligation(node, a.pre, t.pre)
        self.obligation(node, t.post, a.post)

    def rule_Iter(self, node):
        t = node.conclusion
        loop = self.expect_program(node, Bang)
        (child,) = node.children
        a = child.conclusion
        ap = self.app(node, loop.body)
        self.require(node, t.exit == "ok", "Iter concludes with exit ok")
        self.split(node, t.pre, ap, "presumption")
        self.split(node, t.post, simplify(Not(ap)), "result")
        self.require(node, a.program == Seq(loop.body, loop), "premise program is not R; R!")
        self.require(node, a.exit == "ok" and _same(a.pre, t.pre) and _same(a.post, t.post),
                     "premise triple differs")

    def rule_IterVar(self, node):
        t = node.conclusion
        loop = self.expect_program(node, Bang)
        chain = list(node.hints)
        self.require(node, t.exit == "ok", "IterVar concludes with exit ok")
        self.require(node, len(chain) >= 1, "IterVar needs the chain c_0..c_n as hints")
        self.require(node, len(node.children) == len(chain) - 1,
                     f"IterVar with {len(chain)} chain conditions needs {len(chain) - 1} premises")
        self.require(node, _same(chain[0], t.pre) and _same(chain[-1], t.post),
                     "chain does not start at the presumption and end at the result")
        for i, child in enumerate(node.children):
            a = child.conclusion
            self.require(node, a.program == loop.body and a.exit == "ok",
                         f"premise {i + 1} is not an ok triple for {loop.body}")
            self.require(node, _same(a.pre, chain[i]) and _same(a.post, chain[i + 1]),
                         f"premise {i + 1} does not link c_{i} to c_{i + 1}")
        self.obligation(node, chain[-1], Not(self.app(node, loop.body)))


def check_proof(root: ProofNode, env, cfg: DischargeConfig | None = None):
    """Verdict for a proof tree: Valid, ValidUpToBound or Rejected."""
    cfg = cfg or DischargeConfig()
    chk = _Checker(env, cfg)
    try:
        chk.check(root)
    except _Reject as r:
        return Rejected(r.node, r.reason)
    if chk.bounded:
        return ValidUpToBound(cfg.describe(), tuple(chk.bounded))
    return Valid()
