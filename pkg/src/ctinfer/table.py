"""Dense joint probability tables and the exact operations on them.

A :class:`JointTable` holds one probability per combination of variable
states. Cells are stored as an n-dimensional numpy array with one axis per
variable in declared order, so the flat (row-major) layout has the last
variable varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateName,
    DuplicateState,
    EmptyKeepSet,
    MassOutOfTolerance,
    NegativeCell,
    NotTwoByTwo,
    NotTwoCubed,
    TooFewStates,
    UnknownState,
    UnknownVariable,
    WrongCellCount,
    ZeroCell,
    ZeroProbabilityEvidence,
)

MASS_TOLERANCE = 1e-6

Assignment = Mapping[str, str]


@dataclass(frozen=True)
class VariableSpec:
    """A discrete variable with an ordered list of at least two states."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) < 2:
            raise TooFewStates(
                f"variable '{self.name}' needs at least 2 states, got {len(self.states)}"
            )
        if len(set(self.states)) != len(self.states):
            raise DuplicateState(f"duplicate state label in variable '{self.name}'")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(
                f"unknown state '{state}' for variable '{self.name}'"
            ) from None


@dataclass(frozen=True, eq=False)
class JointTable:
    """Immutable joint distribution over an ordered list of variables.

    Build tables with :func:`new_table`; the constructor itself does not
    validate mass. ``scale`` is the factor applied during normalization
    (1.0 when the input already summed to one).
    """

    variables: tuple[VariableSpec, ...]
    cells: np.ndarray
    scale: float = field(default=1.0)

    def __post_init__(self):
        arr = np.array(self.cells, dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @property
    def flat(self) -> np.ndarray:
        return self.cells.ravel()

    @property
    def mass(self) -> float:
        return float(self.cells.sum())

    def variable(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(f"unknown variable '{name}'")

    def axis(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise UnknownVariable(f"unknown variable '{name}'")

    def prob(self, assignment: Assignment) -> float:
        """Probability of the (possibly partial) event ``assignment``."""
        return float(self.cells[self._index(assignment)].sum())

    def reorder(self, names: Sequence[str]) -> "JointTable":
        """Same distribution with the variables permuted into ``names`` order."""
        if sorted(names) != sorted(self.names) or len(set(names)) != len(names):
            raise UnknownVariable(
                f"reorder needs a permutation of {list(self.names)}, got {list(names)}"
            )
        axes = [self.axis(n) for n in names]
        return JointTable(
            tuple(self.variables[a] for a in axes), np.transpose(self.cells, axes)
        )

    def states_of(self, flat_index: int) -> dict[str, str]:
        idx = np.unravel_index(flat_index, self.shape)
        return {v.name: v.states[i] for v, i in zip(self.variables, idx)}

    def __eq__(self, other):
        if not isinstance(other, JointTable):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(
            self.cells, other.cells
        )

    def allclose(self, other: "JointTable", atol: float = 1e-12) -> bool:
        return self.variables == other.variables and bool(
            np.allclose(self.cells, other.cells, rtol=0.0, atol=atol)
        )

    def _index(self, assignment: Assignment) -> tuple:
        check_assignment(self, assignment)
        idx: list = [slice(None)] * len(self.variables)
        for name, state in assignment.items():
            idx[self.axis(name)] = self.variable(name).index(state)
        return tuple(idx)


def check_assignment(t: JointTable, assignment: Assignment) -> None:
    for name, state in assignment.items():
        t.variable(name).index(state)


def new_table(specs: Sequence[VariableSpec], cells) -> JointTable:
    """Validate cells against ``specs`` and return a normalized table.

    ``cells`` may be flat (row-major, last variable fastest) or already
    shaped. The total mass must be within 1e-6 of one; it is then rescaled
    to exactly one and the applied factor kept in ``table.scale``.
    """
    specs = tuple(specs)
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise DuplicateName(f"duplicate variable name '{dup}'")
    shape = tuple(s.cardinality for s in specs)
    arr = np.asarray(cells, dtype=float)
    expected = int(np.prod(shape, dtype=int))
    if arr.size != expected:
        raise WrongCellCount(f"expected {expected} cells for shape {shape}, got {arr.size}")
    arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise NegativeCell("cells must be finite")
    if np.any(arr < 0):
        raise NegativeCell(f"negative cell value {arr.min()!r}")
    total = float(arr.sum())
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise MassOutOfTolerance(f"cells sum to {total!r}, expected 1 within {MASS_TOLERANCE}")
    scale = 1.0 / total
    return JointTable(specs, arr * scale, scale=scale)


def marginalize(t: JointTable, keep: Iterable[str]) -> JointTable:
    """Sum out every variable not in ``keep``; kept variables stay in table order."""
    keep = set(keep)
    if not keep:
        raise EmptyKeepSet("marginalize needs at least one variable to keep")
    for name in keep:
        t.axis(name)
    drop = tuple(i for i, v in enumerate(t.variables) if v.name not in keep)
    kept = tuple(v for v in t.variables if v.name in keep)
    return JointTable(kept, t.cells.sum(axis=drop) if drop else t.cells)


def condition(t: JointTable, hard: Assignment) -> JointTable:
    """Slice on the hard assignment and renormalize: P(rest & hard) / P(hard)."""
    if not hard:
        return t
    idx = t._index(hard)
    piece = t.cells[idx]
    denom = float(piece.sum())
    if denom <= 0.0:
        desc = ", ".join(f"{k}={v}" for k, v in hard.items())
        raise ZeroProbabilityEvidence(f"evidence {{{desc}}} has probability 0")
    rest = tuple(v for v in t.variables if v.name not in hard)
    return JointTable(rest, piece / denom)


def marginal_dist(t: JointTable, var: str) -> np.ndarray:
    """One-variable marginal as an array ordered like the variable's states."""
    ax = t.axis(var)
    others = tuple(i for i in range(t.cells.ndim) if i != ax)
    return t.cells.sum(axis=others) if others else t.cells.copy()


def _require_positive(cells: np.ndarray) -> None:
    if np.any(cells <= 0):
        raise ZeroCell("odds ratios need strictly positive cells")


def pairwise_odds_ratio(t: JointTable) -> float:
    """Cross-product ratio p11*p22 / (p12*p21) of a 2x2 table."""
    if t.shape != (2, 2):
        raise NotTwoByTwo(f"expected two binary variables, got shape {t.shape}")
    c = t.cells
    _require_positive(c)
    return float(c[0, 0] * c[1, 1] / (c[0, 1] * c[1, 0]))


def local_odds_ratios(t: JointTable, var_a: str, var_b: str) -> np.ndarray:
    """Reference-cell odds ratios between two variables.

    Entry ``[i-1, j-1]`` is the cross-product ratio of the 2x2 subtable on
    states ``{first, i}`` of ``var_a`` and ``{first, j}`` of ``var_b``. The
    table is marginalized onto the pair first when it has other variables.
    """
    if var_a == var_b:
        raise NotTwoByTwo("local odds ratios need two distinct variables")
    t.axis(var_a), t.axis(var_b)
    sub = marginalize(t, {var_a, var_b}).reorder([var_a, var_b]).cells
    _require_positive(sub)
    return sub[0, 0] * sub[1:, 1:] / (sub[1:, :1] * sub[:1, 1:])


def _two_cubed(t: JointTable) -> np.ndarray:
    if t.shape != (2, 2, 2):
        raise NotTwoCubed(f"expected three binary variables, got shape {t.shape}")
    _require_positive(t.cells)
    return t.cells


def threeway_odds_ratio(t: JointTable) -> float:
    """Second-order interaction ratio of a 2x2x2 table.

    Equals OR(first, second | third=first state) / OR(first, second | third=second state).
    """
    p = _two_cubed(t)
    num = p[0, 0, 0] * p[1, 1, 0] * p[1, 0, 1] * p[0, 1, 1]
    den = p[1, 0, 0] * p[0, 1, 0] * p[0, 0, 1] * p[1, 1, 1]
    return float(num / den)


def layer_product_odds_ratio(t: JointTable) -> float:
    """Product over the middle variable's layers of the first-by-third odds ratios.

    In a 2x2x2 table over (A, B, C) this is
    ``p000 p010 p101 p111 / (p100 p110 p001 p011)``, i.e. the association of
    A with C accumulated across both levels of B. Kept alongside the usual
    pairwise ratio because some sources print this grouping as the A-B ratio.
    """
    p = _two_cubed(t)
    num = p[0, 0, 0] * p[0, 1, 0] * p[1, 0, 1] * p[1, 1, 1]
    den = p[1, 0, 0] * p[1, 1, 0] * p[0, 0, 1] * p[0, 1, 1]
    return float(num / den)
