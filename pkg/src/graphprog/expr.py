"""Integer expressions and the label lists built from them.

Labels are non-empty tuples. In concrete (host) graphs the items are plain
``int``; in rule schemata and conditions they are :data:`IntExpr` trees.
Evaluation returns ``None`` for an undefined value (unknown variable or a
zero divisor) and ``None`` propagates upward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

__all__ = [
    "Const", "Var", "Neg", "BinOp", "IntExpr", "Label",
    "Cmp", "CTrue", "CFalse", "CNot", "CAnd", "COr", "Constraint",
    "eval_expr", "eval_label", "eval_constraint", "apply_subst",
    "expr_vars", "label_vars", "constraint_vars", "constraint_consts",
    "normalize", "normalize_label", "as_expr", "format_label", "solve_linear",
]

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable names must be non-empty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "IntExpr"

    def __str__(self) -> str:
        inner = _wrap(self.arg, 3)
        # "--" would read as one token
        return "-" + (f"({inner})" if inner.startswith("-") else inner)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "IntExpr"
    right: "IntExpr"

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")

    def __str__(self) -> str:
        prec = _prec(self)
        # left-associative: the right operand needs parens at equal precedence
        return f"{_wrap(self.left, prec)} {self.op} {_wrap(self.right, prec + 1)}"


IntExpr = Union[Const, Var, Neg, BinOp]
Label = tuple  # tuple[int, ...] (concrete) or tuple[IntExpr, ...] (symbolic)


def _prec(e) -> int:
    if isinstance(e, BinOp):
        return 1 if e.op in "+-" else 2
    if isinstance(e, Const) and e.value < 0:
        return 3
    return 4 if not isinstance(e, Neg) else 3


def _wrap(e, prec: int) -> str:
    s = str(e)
    return f"({s})" if _prec(e) < prec else s


def as_expr(item) -> IntExpr:
    """Lift a concrete label item to an expression."""
    if isinstance(item, int):
        return Const(item)
    return item


def format_label(label) -> str:
    if label is None:
        return "_"
    return ":".join(str(i) for i in label)


# ---------------------------------------------------------------------------
# evaluation

def _div(a: int, b: int):
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def eval_expr(e, interp: Mapping[str, int]):
    """Value of ``e`` under ``interp``, or ``None`` when undefined."""
    if isinstance(e, int):
        return e
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return interp.get(e.name)
    if isinstance(e, Neg):
        v = eval_expr(e.arg, interp)
        return None if v is None else -v
    a = eval_expr(e.left, interp)
    if a is None:
        return None
    b = eval_expr(e.right, interp)
    if b is None:
        return None
    op = e.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return _div(a, b)


def eval_label(label, interp: Mapping[str, int]):
    """Concrete label (tuple of ints) or ``None`` if any item is undefined."""
    out = []
    for item in label:
        v = eval_expr(item, interp)
        if v is None:
            return None
        out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# constraints

@dataclass(frozen=True)
class Cmp:
    op: str
    left: IntExpr
    right: IntExpr

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class CTrue:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class CFalse:
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class CNot:
    arg: "Constraint"

    def __str__(self) -> str:
        return f"not ({self.arg})"


@dataclass(frozen=True)
class CAnd:
    left: "Constraint"
    right: "Constraint"

    def __str__(self) -> str:
        return f"({self.left}) and ({self.right})"


@dataclass(frozen=True)
class COr:
    left: "Constraint"
    right: "Constraint"

    def __str__(self) -> str:
        return f"({self.left}) or ({self.right})"


Constraint = Union[Cmp, CTrue, CFalse, CNot, CAnd, COr]

_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_constraint(g, interp: Mapping[str, int]) -> bool:
    """Two-valued: a comparison with an undefined operand is false."""
    if isinstance(g, Cmp):
        a = eval_expr(g.left, interp)
        b = eval_expr(g.right, interp)
        if a is None or b is None:
            return False
        return _CMP[g.op](a, b)
    if isinstance(g, CTrue):
        return True
    if isinstance(g, CFalse):
        return False
    if isinstance(g, CNot):
        return not eval_constraint(g.arg, interp)
    if isinstance(g, CAnd):
        return eval_constraint(g.left, interp) and eval_constraint(g.right, interp)
    if isinstance(g, COr):
        return eval_constraint(g.left, interp) or eval_constraint(g.right, interp)
    raise TypeError(f"not a constraint: {g!r}")


# ---------------------------------------------------------------------------
# variables and substitution

def expr_vars(e) -> set:
    if isinstance(e, (int, Const)):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return expr_vars(e.arg)
    return expr_vars(e.left) | expr_vars(e.right)


def label_vars(label) -> set:
    out = set()
    if label is not None:
        for item in label:
            out |= expr_vars(item)
    return out


def constraint_vars(g) -> set:
    if isinstance(g, Cmp):
        return expr_vars(g.left) | expr_vars(g.right)
    if isinstance(g, (CTrue, CFalse)):
        return set()
    if isinstance(g, CNot):
        return constraint_vars(g.arg)
    return constraint_vars(g.left) | constraint_vars(g.right)


def _expr_consts(e, out: set) -> None:
    if isinstance(e, int):
        out.add(e)
    elif isinstance(e, Const):
        out.add(e.value)
    elif isinstance(e, Neg):
        _expr_consts(e.arg, out)
        # -c is the value actually compared
        if isinstance(e.arg, Const):
            out.add(-e.arg.value)
    elif isinstance(e, BinOp):
        _expr_consts(e.left, out)
        _expr_consts(e.right, out)


def constraint_consts(g) -> set:
    out: set = set()
    if isinstance(g, Cmp):
        _expr_consts(g.left, out)
        _expr_consts(g.right, out)
    elif isinstance(g, CNot):
        out |= constraint_consts(g.arg)
    elif isinstance(g, (CAnd, COr)):
        out |= constraint_consts(g.left) | constraint_consts(g.right)
    return out


def label_consts(label) -> set:
    out: set = set()
    for item in label or ():
        _expr_consts(item, out)
    return out


def _subst_expr(e, sigma):
    if isinstance(e, (int, Const)):
        return e
    if isinstance(e, Var):
        return sigma.get(e.name, e)
    if isinstance(e, Neg):
        return Neg(_subst_expr(e.arg, sigma))
    return BinOp(e.op, _subst_expr(e.left, sigma), _subst_expr(e.right, sigma))


def _subst_constraint(g, sigma):
    if isinstance(g, Cmp):
        return Cmp(g.op, _subst_expr(g.left, sigma), _subst_expr(g.right, sigma))
    if isinstance(g, (CTrue, CFalse)):
        return g
    if isinstance(g, CNot):
        return CNot(_subst_constraint(g.arg, sigma))
    return type(g)(_subst_constraint(g.left, sigma), _subst_constraint(g.right, sigma))


def apply_subst(obj, sigma: Mapping[str, IntExpr]):
    """Simultaneous substitution into an expression, label or constraint."""
    if not sigma:
        return obj
    if obj is None:
        return None
    if isinstance(obj, tuple):
        return tuple(_subst_expr(i, sigma) for i in obj)
    if isinstance(obj, (Cmp, CTrue, CFalse, CNot, CAnd, COr)):
        return _subst_constraint(obj, sigma)
    return _subst_expr(obj, sigma)


# ---------------------------------------------------------------------------
# normal form
#
# An expression is flattened into a polynomial over atoms, where an atom is a
# variable or a (normalised) division that could not be folded. Monomials with
# a zero coefficient are kept when they mention an atom, so that definedness
# is preserved: x - x normalises to 0 * x, not 0.

def _atom_key(atom) -> tuple:
    if isinstance(atom, Var):
        return (0, atom.name)
    return (1, str(atom))


def _poly_add(p, q, sign=1):
    out = dict(p)
    for mono, c in q.items():
        out[mono] = out.get(mono, 0) + sign * c
    return out


def _poly_mul(p, q):
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            mono = tuple(sorted(m1 + m2, key=_atom_key))
            out[mono] = out.get(mono, 0) + c1 * c2
    return out


def _to_poly(e) -> dict:
    if isinstance(e, int):
        return {(): e}
    if isinstance(e, Const):
        return {(): e.value}
    if isinstance(e, Var):
        return {(e,): 1}
    if isinstance(e, Neg):
        return {m: -c for m, c in _to_poly(e.arg).items()}
    if e.op == "+":
        return _poly_add(_to_poly(e.left), _to_poly(e.right))
    if e.op == "-":
        return _poly_add(_to_poly(e.left), _to_poly(e.right), -1)
    if e.op == "*":
        return _poly_mul(_to_poly(e.left), _to_poly(e.right))
    num = _from_poly(_to_poly(e.left))
    den = _from_poly(_to_poly(e.right))
    if isinstance(num, Const) and isinstance(den, Const) and den.value != 0:
        return {(): _div(num.value, den.value)}
    if isinstance(den, Const) and den.value == 1:
        return _to_poly(num)
    return {(BinOp("/", num, den),): 1}


def _mono_expr(mono, coeff):
    term = None
    for atom in mono:
        term = atom if term is None else BinOp("*", term, atom)
    if term is None:
        return Const(coeff)
    if coeff == 1:
        return term
    return BinOp("*", Const(coeff), term)


def _from_poly(poly) -> IntExpr:
    monos = [(m, c) for m, c in poly.items() if m or c != 0]
    if not monos:
        return Const(0)
    monos.sort(key=lambda mc: (len(mc[0]) == 0, len(mc[0]), [_atom_key(a) for a in mc[0]]))
    out = None
    for mono, coeff in monos:
        if out is None:
            if coeff < 0 and mono:
                out = Neg(_mono_expr(mono, -coeff))
            else:
                out = _mono_expr(mono, coeff)
        elif coeff < 0:
            out = BinOp("-", out, _mono_expr(mono, -coeff))
        else:
            out = BinOp("+", out, _mono_expr(mono, coeff))
    return out


def normalize(e) -> IntExpr:
    """Deterministic canonical form; idempotent and value-preserving."""
    return _from_poly(_to_poly(e))


def normalize_label(label):
    if label is None:
        return None
    return tuple(i if isinstance(i, int) else normalize(i) for i in label)


def solve_linear(e, target: int, interp: Mapping[str, int]):
    """Solve ``e = target`` for the single variable of ``e`` not in ``interp``.

    Returns ``(name, value)``, ``False`` when no integer solves it, or
    ``None`` when ``e`` is not linear in exactly one unknown.
    """
    bound = {k: Const(v) for k, v in interp.items()}
    poly = _to_poly(apply_subst(as_expr(e), bound) if bound else as_expr(e))
    const = poly.get((), 0)
    terms = [(m, c) for m, c in poly.items() if m]
    if len(terms) != 1:
        return None
    (mono, coeff), = terms
    if len(mono) != 1 or not isinstance(mono[0], Var) or coeff == 0:
        return None
    q, r = divmod(target - const, coeff)
    if r:
        return False
    return mono[0].name, q
