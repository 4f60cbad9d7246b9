"""Reading and writing knowledge-base files.

The format is line oriented::

    # comment
    variable e1 false true
    variable c  false true
    p e1=false c=false 0.05
    ...

``variable`` lines fix the layout order; each ``p`` line gives one total
assignment (variables in any order) and a decimal probability. Cells that
are never mentioned default to 0 with a single warning.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import KbError, TableError
from .table import JointTable, VariableSpec, new_table

_NAME = re.compile(r"^[^\s=#]+$")
_DECIMAL = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int

    def __str__(self):
        return f"line {self.line}: {self.severity}: {self.message}"


@dataclass
class KbDocument:
    variables: list[VariableSpec] = field(default_factory=list)
    cells: list[tuple[dict[str, str], float]] = field(default_factory=list)
    cell_lines: list[int] = field(default_factory=list)
    variable_lines: list[int] = field(default_factory=list)

    @property
    def raw_mass(self) -> float:
        return float(sum(p for _, p in self.cells))


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_kb(text: str) -> tuple[KbDocument, list[Diagnostic]]:
    doc = KbDocument()
    diags: list[Diagnostic] = []

    def error(lineno, msg):
        diags.append(Diagnostic("error", msg, lineno))

    cell_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        keyword, *rest = line.split()
        if keyword == "variable":
            if not rest:
                error(lineno, "variable declaration needs a name and states")
                continue
            name, states = rest[0], rest[1:]
            bad = [tok for tok in [name, *states] if not _NAME.match(tok)]
            if bad:
                error(lineno, f"invalid identifier '{bad[0]}'")
            elif len(states) < 2:
                error(lineno, f"variable '{name}' needs at least 2 states")
            elif len(set(states)) != len(states):
                error(lineno, f"duplicate state in variable '{name}'")
            elif any(v.name == name for v in doc.variables):
                error(lineno, f"duplicate variable '{name}'")
            else:
                doc.variables.append(VariableSpec(name, states))
                doc.variable_lines.append(lineno)
        elif keyword == "p":
            cell_lines.append((lineno, rest))
        else:
            error(lineno, f"unknown keyword '{keyword}'")

    specs = {v.name: v for v in doc.variables}
    seen: dict[tuple, int] = {}
    for lineno, tokens in cell_lines:
        if not tokens:
            error(lineno, "cell line needs assignments and a probability")
            continue
        *pairs, prob_tok = tokens
        if not _DECIMAL.match(prob_tok):
            error(lineno, f"probability '{prob_tok}' is not a decimal literal")
            continue
        prob = float(prob_tok)
        if prob < 0:
            error(lineno, f"negative probability {prob_tok}")
            continue
        assignment: dict[str, str] = {}
        ok = True
        for pair in pairs:
            name, sep, state = pair.partition("=")
            if not sep or not name or not state:
                error(lineno, f"expected <variable>=<state>, got '{pair}'")
                ok = False
            elif name not in specs:
                error(lineno, f"unknown variable '{name}'")
                ok = False
            elif state not in specs[name].states:
                error(lineno, f"unknown state '{state}' for variable '{name}'")
                ok = False
            elif name in assignment:
                error(lineno, f"variable '{name}' assigned twice")
                ok = False
            else:
                assignment[name] = state
        if not ok:
            continue
        missing = [n for n in specs if n not in assignment]
        if missing:
            error(lineno, f"cell line is missing variable(s) {', '.join(missing)}")
            continue
        key = tuple(assignment[n] for n in specs)
        if key in seen:
            error(lineno, f"duplicate cell (first given on line {seen[key]})")
            continue
        seen[key] = lineno
        doc.cells.append((assignment, prob))
        doc.cell_lines.append(lineno)

    has_errors = any(d.severity == "error" for d in diags)
    if not doc.variables and not has_errors:
        error(1, "no variables declared")
    total = int(np.prod([v.cardinality for v in doc.variables], dtype=int))
    if doc.variables and not has_errors and len(seen) < total:
        first = doc.variable_lines[0]
        diags.append(
            Diagnostic(
                "warning",
                f"{total - len(seen)} of {total} cells unspecified; defaulting to 0",
                first,
            )
        )
    diags.sort(key=lambda d: d.line)
    return doc, diags


def to_table(doc: KbDocument) -> JointTable:
    """Build a normalized table; cell order follows the declared variables."""
    shape = tuple(v.cardinality for v in doc.variables)
    arr = np.zeros(shape)
    for assignment, prob in doc.cells:
        idx = tuple(v.index(assignment[v.name]) for v in doc.variables)
        arr[idx] = prob
    return new_table(doc.variables, arr)


def load_table(text: str) -> tuple[JointTable, list[Diagnostic]]:
    """Parse and build in one step; raises :class:`KbError` on error diagnostics."""
    doc, diags = parse_kb(text)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise KbError(str(errors[0]), diags)
    try:
        return to_table(doc), diags
    except TableError as exc:
        raise KbError(str(exc), diags) from exc


def serialize_kb(t: JointTable) -> str:
    lines = [f"variable {v.name} {' '.join(v.states)}" for v in t.variables]
    for combo, prob in zip(
        itertools.product(*(v.states for v in t.variables)), t.flat
    ):
        pairs = " ".join(f"{v.name}={s}" for v, s in zip(t.variables, combo))
        lines.append(f"p {pairs} {format(float(prob), '.17g')}")
    return "\n".join(lines) + "\n"
