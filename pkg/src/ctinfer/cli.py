"""Command-line front end.

Exit codes: 0 success, 1 knowledge-base validation error, 2 IPF did not
converge or a target is unreachable, 3 usage or flag error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .errors import KbError, NotConverged, TableError, TargetUnreachable
from .inference import Hard, Soft, posterior, posterior_independent
from .ipf import IpfConfig, IpfReport, ipf_adjust
from .kbio import Diagnostic, load_table
from .table import (
    JointTable,
    condition,
    local_odds_ratios,
    marginalize,
    threeway_odds_ratio,
)

EXIT_OK = 0
EXIT_KB = 1
EXIT_IPF = 2
EXIT_USAGE = 3

SOFT_SUM_TOLERANCE = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return f"{x + 0.0:.6f}"


def parse_hard(flag: str) -> tuple[str, str]:
    name, sep, state = flag.partition("=")
    if not sep or not name or not state:
        raise UsageError(f"--hard expects var=state, got '{flag}'")
    return name, state


def parse_soft(flag: str, t: JointTable) -> tuple[str, list[float]]:
    """``var=state:p,state:p`` with every state listed exactly once."""
    name, sep, body = flag.partition("=")
    if not sep or not name or not body:
        raise UsageError(f"--soft expects var=state:p,state:p,..., got '{flag}'")
    try:
        var = t.variable(name)
    except TableError as exc:
        raise UsageError(str(exc)) from None
    given: dict[str, float] = {}
    for item in body.split(","):
        state, sep, prob = item.partition(":")
        if not sep:
            raise UsageError(f"--soft entry '{item}' must be state:probability")
        if state not in var.states:
            raise UsageError(f"unknown state '{state}' for variable '{name}'")
        if state in given:
            raise UsageError(f"state '{state}' listed twice in --soft {name}")
        try:
            given[state] = float(prob)
        except ValueError:
            raise UsageError(f"bad probability '{prob}' in --soft {name}") from None
    missing = [s for s in var.states if s not in given]
    if missing:
        raise UsageError(f"--soft {name} is missing state(s) {', '.join(missing)}")
    dist = [given[s] for s in var.states]
    if not all(0.0 <= p <= 1.0 for p in dist):
        raise UsageError(f"--soft {name} probabilities must lie in [0, 1]")
    if abs(sum(dist) - 1.0) > SOFT_SUM_TOLERANCE:
        raise UsageError(f"--soft {name} probabilities sum to {sum(dist)!r}, expected 1")
    return name, dist


def _names(csv: str) -> list[str]:
    names = [n for n in csv.split(",") if n]
    if not names:
        raise UsageError("expected a comma-separated list of variable names")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctinfer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, evidence=False, ipf=False):
        p.add_argument("kb", help="knowledge-base file")
        p.add_argument("--json", action="store_true", help="emit JSON")
        if evidence:
            p.add_argument("--hard", action="append", default=[], metavar="VAR=STATE")
            p.add_argument("--soft", action="append", default=[], metavar="VAR=S:P,...")
        if ipf:
            p.add_argument("--tol", type=float, default=IpfConfig.tolerance)
            p.add_argument("--max-cycles", type=int, default=IpfConfig.max_cycles)
        return p

    common(sub.add_parser("validate", help="check a knowledge-base file"))
    p = common(sub.add_parser("marginalize", help="sum out all but --vars"))
    p.add_argument("--vars", required=True)
    p = common(sub.add_parser("condition", help="condition on hard evidence"))
    p.add_argument("--hard", action="append", default=[], metavar="VAR=STATE")
    p = common(sub.add_parser("odds-ratio", help="pairwise or three-way odds ratios"))
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--vars", help="two variables a,b")
    group.add_argument("--three-way", help="three binary variables a,b,c")
    p = common(sub.add_parser("ipf", help="fit a subtable to soft marginals"), True, True)
    p.add_argument("--vars", help="subtable variables (default: the soft ones)")
    p = common(sub.add_parser("query", help="posterior over a target"), True, True)
    p.add_argument("--target", required=True)
    p.add_argument("--independent", action="store_true",
                   help="multiply soft marginals instead of fitting")
    return parser


def _diag_json(diags: Sequence[Diagnostic]) -> list[dict]:
    return [{"severity": d.severity, "message": d.message, "line": d.line} for d in diags]


def _ipf_json(report: IpfReport) -> dict:
    return {
        "converged": report.converged,
        "cycles_used": report.cycles_used,
        "max_residual": report.max_residual,
    }


def _ipf_text(report: IpfReport) -> list[str]:
    return [
        f"converged: {str(report.converged).lower()}",
        f"cycles: {report.cycles_used}",
        f"max_residual: {_fmt(report.max_residual)}",
    ]


def _table_payload(t: JointTable) -> dict:
    return {
        "variables": [{"name": v.name, "states": list(v.states)} for v in t.variables],
        "cells": [
            {"assignment": t.states_of(i), "p": float(p)} for i, p in enumerate(t.flat)
        ],
    }


def _table_text(t: JointTable) -> list[str]:
    lines = []
    for i, p in enumerate(t.flat):
        states = t.states_of(i)
        lines.append(" ".join(f"{k}={v}" for k, v in states.items()) + f" {_fmt(p)}")
    return lines


class _Session:
    def __init__(self, args, out, err):
        self.args = args
        self.out = out
        self.err = err
        self.diags: list[Diagnostic] = []

    def emit(self, lines: list[str], payload: dict):
        if self.args.json:
            payload["diagnostics"] = _diag_json(self.diags)
            self.out.write(json.dumps(payload, indent=2) + "\n")
        else:
            for line in lines:
                self.out.write(line + "\n")

    def load(self) -> JointTable:
        try:
            with open(self.args.kb, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise KbError(f"cannot read {self.args.kb}: {exc.strerror}") from None
        t, self.diags = load_table(text)
        for d in self.diags:
            self.err.write(f"{self.args.kb}: {d}\n")
        return t

    def evidence(self, t: JointTable) -> dict:
        ev: dict = {}
        for flag in self.args.hard:
            name, state = parse_hard(flag)
            if name in ev:
                raise UsageError(f"variable '{name}' given evidence twice")
            ev[name] = Hard(state)
        for flag in self.args.soft:
            name, dist = parse_soft(flag, t)
            if name in ev:
                raise UsageError(f"variable '{name}' given evidence twice")
            ev[name] = Soft(dist)
        return ev

    def config(self) -> IpfConfig:
        try:
            return IpfConfig(self.args.tol, self.args.max_cycles)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _cmd_validate(s: _Session):
    t = s.load()
    n = len(t.flat)
    mass = 1.0 / t.scale  # mass as written, before normalization
    s.emit(
        [f"ok: {len(t.variables)} variables, {n} cells, mass {_fmt(mass)}"],
        {"ok": True, "variables": len(t.variables), "cells": n, "mass": mass},
    )


def _cmd_marginalize(s: _Session):
    t = marginalize(s.load(), _names(s.args.vars))
    s.emit(_table_text(t), _table_payload(t))


def _cmd_condition(s: _Session):
    t = s.load()
    hard = dict(parse_hard(f) for f in s.args.hard)
    c = condition(t, hard)
    if not c.variables:
        raise UsageError("conditioning on every variable leaves an empty table")
    s.emit(_table_text(c), _table_payload(c))


def _cmd_odds_ratio(s: _Session):
    t = s.load()
    if s.args.three_way:
        names = _names(s.args.three_way)
        if len(names) != 3 or len(set(names)) != 3:
            raise UsageError("--three-way needs three distinct variables")
        value = threeway_odds_ratio(marginalize(t, names).reorder(names))
        s.emit(
            [f"three-way {','.join(names)}: {_fmt(value)}"],
            {"variables": names, "three_way": value},
        )
        return
    names = _names(s.args.vars)
    if len(names) != 2:
        raise UsageError("--vars needs exactly two variables")
    a, b = (t.variable(n) for n in names)
    ratios = local_odds_ratios(t, a.name, b.name)
    lines = [f"reference: {a.name}={a.states[0]} {b.name}={b.states[0]}"]
    entries = []
    for i, sa in enumerate(a.states[1:]):
        for j, sb in enumerate(b.states[1:]):
            value = float(ratios[i, j])
            lines.append(f"{a.name}={sa} {b.name}={sb} {_fmt(value)}")
            entries.append({"states": {a.name: sa, b.name: sb}, "value": value})
    s.emit(
        lines,
        {
            "variables": names,
            "reference": {a.name: a.states[0], b.name: b.states[0]},
            "odds_ratios": entries,
        },
    )


def _cmd_ipf(s: _Session):
    t = s.load()
    ev = s.evidence(t)
    hard = {k: e.state for k, e in ev.items() if isinstance(e, Hard)}
    soft = {k: e.distribution for k, e in ev.items() if isinstance(e, Soft)}
    if not soft:
        raise UsageError("ipf needs at least one --soft target")
    keep = _names(s.args.vars) if s.args.vars else list(soft)
    stray = [n for n in soft if n not in keep]
    if stray:
        raise UsageError(f"--soft variable(s) {', '.join(stray)} not in --vars")
    clash = [n for n in hard if n in keep]
    if clash:
        raise UsageError(f"--hard variable(s) {', '.join(clash)} cannot be in --vars")
    sub = marginalize(condition(t, hard), keep)
    try:
        fitted, report = ipf_adjust(sub, soft, s.config())
    except NotConverged as exc:
        fitted, report = exc.table, exc.report
        s.emit(
            _table_text(fitted) + _ipf_text(report),
            {**_table_payload(fitted), "ipf": _ipf_json(report)},
        )
        raise
    s.emit(
        _table_text(fitted) + _ipf_text(report),
        {**_table_payload(fitted), "ipf": _ipf_json(report)},
    )


def _cmd_query(s: _Session):
    t = s.load()
    ev = s.evidence(t)
    try:
        if s.args.independent:
            result = posterior_independent(t, ev, s.args.target)
        else:
            result = posterior(t, ev, s.args.target, s.config())
    except NotConverged as exc:
        _emit_query(s, exc.result)
        raise
    _emit_query(s, result)


def _emit_query(s: _Session, result):
    line = f"{result.target}: " + "  ".join(
        f"{state} {_fmt(p)}" for state, p in result.as_dict().items()
    )
    payload = {"target": result.target, "method": result.method, "posterior": result.as_dict()}
    if result.ipf is not None:
        payload["ipf"] = _ipf_json(result.ipf)
    s.emit([line], payload)


COMMANDS = {
    "validate": _cmd_validate,
    "marginalize": _cmd_marginalize,
    "condition": _cmd_condition,
    "odds-ratio": _cmd_odds_ratio,
    "ipf": _cmd_ipf,
    "query": _cmd_query,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    """Execute one command; returns the process exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    session = _Session(args, out, err)
    try:
        COMMANDS[args.command](session)
    except KbError as exc:
        if not exc.diagnostics:
            err.write(f"error: {exc}\n")
        else:
            for d in exc.diagnostics:
                err.write(f"{args.kb}: {d}\n")
            if not any(d.severity == "error" for d in exc.diagnostics):
                err.write(f"error: {exc}\n")
        return EXIT_KB
    except (NotConverged, TargetUnreachable) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_IPF
    except (UsageError, TableError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())
