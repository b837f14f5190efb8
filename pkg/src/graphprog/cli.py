"""Command-line front end.

Exit status: 0 affirmative or valid, 1 refuted or counterexample, 2 usage or
load error, 3 bounded or inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import oracle
from .econd import TRUE, SatConfig, format_condition, satisfies
from .graph import Graph
from .oracle import Universe, parse_label_pool
from .program import Budget, outcomes, run_random
from .proof import Rejected, ValidUpToBound, check_proof, format_triple
from .rules import RuleError, find_matches
from .syntax import ParseError, Workspace, _Parser, builtin_rules
from .transform import app, wpost

OK, REFUTED, USAGE, BOUNDED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rules", action="append", default=[], metavar="FILE|NAMES",
                        help="load a rule/condition file, or select rules by comma-separated names")
    common.add_argument("--program", metavar="FILE|EXPR")
    common.add_argument("--graph", metavar="FILE")
    common.add_argument("--cond", action="append", default=[], metavar="FILE|EXPR")
    common.add_argument("--proof", metavar="FILE")
    common.add_argument("--triple", metavar="FILE|EXPR")
    common.add_argument("--max-nodes", type=int, default=3)
    common.add_argument("--labels", default="0,1,0:0,0:1,1:0,1:1")
    common.add_argument("--max-parallel", type=int, default=1)
    common.add_argument("--max-steps", type=int, default=10_000)
    common.add_argument("--int-window", type=int, default=2)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--samples", type=int, default=200,
                        help="random instances for the shift/right difftests")
    common.add_argument("--witness", default="witness.host",
                        help="where validate writes a counterexample graph")
    common.add_argument("--report", metavar="FILE", help="write a JSON summary")
    common.add_argument("--format", choices=("text", "machine"), default="text")

    p = argparse.ArgumentParser(prog="graphprog", description=(
        "Run graph programs, transform E-conditions and check incorrectness proofs."))
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one seeded execution with a trace")
    sub.add_parser("outcomes", parents=[common], help="all ok/er results of a program")
    sub.add_parser("satisfies", parents=[common], help="does the graph satisfy the condition")
    sub.add_parser("app", parents=[common], help="print App(R)")
    sub.add_parser("wpost", parents=[common], help="print WPost(R, c)")
    sub.add_parser("check", parents=[common], help="check proof scripts")
    sub.add_parser("validate", parents=[common], help="bounded validity of a triple")
    d = sub.add_parser("difftest", parents=[common], help="differential tests of the transformations")
    d.add_argument("kind", choices=("app", "wpost", "shift", "right", "mutants"))
    return p


class _Context:
    def __init__(self, args):
        self.args = args
        self.ws = Workspace(rules=builtin_rules())
        self.selected: list = []
        for item in args.rules:
            if os.path.exists(item):
                self.ws.load(item)
            else:
                self.selected += [n.strip() for n in item.split(",") if n.strip()]
        for n in self.selected:
            if n not in self.ws.rules:
                raise UsageError(f"unknown rule {n!r}")
        self.sat = SatConfig(int_window=args.int_window)
        self.budget = Budget(max_steps=args.max_steps)

    # -- inputs
    def text_or_file(self, value):
        if os.path.exists(value):
            with open(value, encoding="utf-8") as fh:
                return fh.read(), value
        return value, "<command line>"

    def rule_set(self) -> list:
        if not self.selected:
            raise UsageError("select rules with --rules NAMES")
        return [self.ws.rules[n] for n in self.selected]

    def program(self):
        if not self.args.program:
            raise UsageError("--program is required")
        text, src = self.text_or_file(self.args.program)
        if src != "<command line>":
            before = dict(self.ws.programs)
            try:
                self.ws.load(src)
            except ParseError:
                pass
            else:
                new = [p for n, p in self.ws.programs.items() if n not in before]
                if new:
                    return new[-1]
        p = _Parser(text, src, self.ws)
        prog = p.program()
        p.accept(";")
        if not p.at_end():
            raise p.error(f"unexpected trailing {p.tok.value!r}")
        return prog

    def graph(self) -> Graph:
        if not self.args.graph:
            raise UsageError("--graph is required")
        text, src = self.text_or_file(self.args.graph)
        ws = Workspace(check_rules=False)
        ws.load_text(text if text.lstrip().startswith("graph") else "graph " + text, src)
        return list(ws.graphs.values())[-1]

    def conditions(self) -> list:
        out = []
        for value in self.args.cond:
            text, src = self.text_or_file(value)
            if src != "<command line>":
                before = set(self.ws.defs)
                try:
                    self.ws.load(src)
                except ParseError:
                    pass
                else:
                    new = [n for n in self.ws.defs if n not in before]
                    if new:
                        out.append(self.ws.defs[new[-1]])
                        continue
            p = _Parser(text, src, self.ws)
            c = p.condition(Graph(), {})
            p.accept(";")
            if not p.at_end():
                raise p.error(f"unexpected trailing {p.tok.value!r}")
            out.append(c)
        return out

    def condition(self):
        conds = self.conditions()
        if len(conds) != 1:
            raise UsageError("give exactly one --cond")
        return conds[0]

    def universe(self) -> Universe:
        return Universe(self.args.max_nodes, parse_label_pool(self.args.labels),
                        self.args.max_parallel)


def _emit(args, text: str, record: dict):
    if args.format == "machine":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_run(ctx: _Context) -> int:
    prog, G = ctx.program(), ctx.graph()
    exit_, H, trace = run_random(prog, G, ctx.ws.rules, ctx.args.seed, ctx.args.max_steps)
    lines = [f"step {i + 1}: {name} at {m}" for i, (name, m) in enumerate(trace)]
    lines += [f"exit: {exit_}", H.format()]
    _emit(ctx.args, "\n".join(lines),
          {"exit": exit_, "graph": H.format(), "trace": [list(t) for t in trace]})
    return {"ok": OK, "er": REFUTED}.get(exit_, BOUNDED)


def cmd_outcomes(ctx: _Context) -> int:
    prog, G = ctx.program(), ctx.graph()
    res = outcomes(prog, G, ctx.ws.rules, ctx.budget)
    ok = [g.format() for g in res.graphs("ok")]
    er = [g.format() for g in res.graphs("er")]
    lines = [f"ok ({len(ok)}):"] + [f"  {g}" for g in ok]
    lines += [f"er ({len(er)}):"] + [f"  {g}" for g in er]
    lines.append(f"truncated: {str(res.truncated).lower()}")
    _emit(ctx.args, "\n".join(lines), {"ok": ok, "er": er, "truncated": res.truncated})
    return BOUNDED if res.truncated else OK


def cmd_satisfies(ctx: _Context) -> int:
    G, c = ctx.graph(), ctx.condition()
    sat, warnings = satisfies(G, c, ctx.sat)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(ctx.args, str(sat).lower(), {"satisfies": sat, "warnings": warnings})
    return OK if sat else REFUTED


def cmd_app(ctx: _Context) -> int:
    c = app(ctx.rule_set())
    _emit(ctx.args, format_condition(c), {"condition": format_condition(c)})
    return OK


def cmd_wpost(ctx: _Context) -> int:
    conds = ctx.conditions() or [TRUE]
    if len(conds) != 1:
        raise UsageError("give at most one --cond")
    c = wpost(ctx.rule_set(), conds[0])
    _emit(ctx.args, format_condition(c), {"condition": format_condition(c)})
    return OK


def cmd_check(ctx: _Context) -> int:
    if not ctx.args.proof:
        raise UsageError("--proof is required")
    ctx.ws.load(ctx.args.proof)
    if not ctx.ws.proofs:
        raise UsageError(f"{ctx.args.proof} contains no proof")
    lines, records, verdicts = [], [], []
    for name, root in ctx.ws.proofs.items():
        v = check_proof(root, ctx.ws.rules)
        verdicts.append(v)
        lines.append(f"{name}: {v}")
        records.append({"proof": name, "verdict": type(v).__name__, "detail": str(v)})
    _emit(ctx.args, "\n".join(lines), {"proofs": records})
    if any(isinstance(v, Rejected) for v in verdicts):
        return REFUTED
    if any(isinstance(v, ValidUpToBound) for v in verdicts):
        return BOUNDED
    return OK


def _triples(ctx: _Context) -> list:
    out = []
    if ctx.args.proof:
        ctx.ws.load(ctx.args.proof)
        out += [(n, p.conclusion) for n, p in ctx.ws.proofs.items()]
    if ctx.args.triple:
        text, src = ctx.text_or_file(ctx.args.triple)
        p = _Parser(text, src, ctx.ws)
        out.append(("triple", p.triple()))
        if not p.at_end():
            raise p.error(f"unexpected trailing {p.tok.value!r}")
    if not out:
        raise UsageError("give --triple or --proof")
    return out


def cmd_validate(ctx: _Context) -> int:
    status = OK
    lines, records = [], []
    for name, t in _triples(ctx):
        rep = oracle.validate_triple_bounded(t, ctx.ws.rules, ctx.universe(), None,
                                             ctx.budget, ctx.sat, ctx.args.jobs)
        lines.append(f"{name}: {format_triple(t)}")
        lines.append(f"  {rep}".replace("\n", "\n  "))
        rec = {"name": name, "valid": rep.valid, "exact": rep.exact,
               "checked": rep.checked_results, "searched": rep.searched}
        if not rep.valid:
            rec["witness"] = rep.counterexample.format()
            with open(ctx.args.witness, "w", encoding="utf-8") as fh:
                fh.write(rep.counterexample.format() + "\n")
            lines.append(f"  witness written to {ctx.args.witness}")
            status = REFUTED
        elif not rep.exact and status == OK:
            status = BOUNDED
        records.append(rec)
    _emit(ctx.args, "\n".join(lines), {"triples": records})
    return status


def _random_cases(ctx: _Context, over_lhs: bool) -> list:
    rules = ctx.rule_set()
    labels = parse_label_pool(ctx.args.labels)
    rng = random.Random(ctx.args.seed)
    cases = []
    tries = 0
    while len(cases) < ctx.args.samples and tries < 100 * ctx.args.samples:
        tries += 1
        r = rules[rng.randrange(len(rules))]
        G = oracle.random_graph(rng, max(ctx.args.max_nodes, 1), labels)
        if not find_matches(r, G):
            continue
        if over_lhs:
            c = oracle.random_condition(rng, r.lhs, tuple(sorted(r.lhs_vars)))
        else:
            c = oracle.random_condition(rng)
        cases.append((r, c, G))
    return cases


def cmd_difftest(ctx: _Context) -> int:
    kind = ctx.args.kind
    if kind == "mutants":
        lines, records, status = [], [], OK
        for name in oracle.MUTANTS:
            rep = oracle.run_mutant(name, ctx.ws.rules)
            caught = bool(rep.violations)
            lines.append(f"{name}: {'caught' if caught else 'MISSED'} "
                         f"({len(rep.violations)} violations in {rep.checked} checks)")
            records.append({"mutant": name, "violations": len(rep.violations),
                            "checked": rep.checked})
            if not caught:
                status = REFUTED
        _emit(ctx.args, "\n".join(lines), {"mutants": records})
        return status
    if kind == "app":
        rep = oracle.difftest_app([[r] for r in ctx.rule_set()], ctx.universe(), ctx.sat)
    elif kind == "wpost":
        conds = ctx.conditions() or [TRUE]
        cases = [([r], c) for r in ctx.rule_set() for c in conds]
        rep = oracle.difftest_wpost(cases, ctx.universe(), None, ctx.sat)
    elif kind == "shift":
        rep = oracle.difftest_shift(_random_cases(ctx, False), ctx.sat)
    else:
        rep = oracle.difftest_right(_random_cases(ctx, True), ctx.sat)
    _emit(ctx.args, str(rep), {
        "kind": rep.kind, "checked": rep.checked,
        "violations": [{"subject": v.subject, "graph": v.graph.format(),
                        "expected": v.expected, "got": v.got, "detail": v.detail}
                       for v in rep.violations]})
    return OK if rep.ok else REFUTED


COMMANDS = {
    "run": cmd_run, "outcomes": cmd_outcomes, "satisfies": cmd_satisfies,
    "app": cmd_app, "wpost": cmd_wpost, "check": cmd_check,
    "validate": cmd_validate, "difftest": cmd_difftest,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        ctx = _Context(args)
        return COMMANDS[args.command](ctx)
    except (ParseError, UsageError, RuleError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
