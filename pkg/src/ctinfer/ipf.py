"""Iterative proportional fitting of one-variable marginals.

Cells are repeatedly multiplied by the ratio of desired to current marginal
probability, one constrained variable at a time. Multiplicative updates
that depend on a single variable's state leave every cross-product ratio
of the table untouched, so the fitted table keeps the starting table's
associations while taking on the new marginals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidTargets, NotConverged, TargetUnreachable
from .table import JointTable, marginal_dist

TARGET_TOLERANCE = 1e-9

MarginalTargets = Mapping[str, Sequence[float]]


@dataclass(frozen=True)
class IpfConfig:
    tolerance: float = 1e-10
    max_cycles: int = 10000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_cycles) != self.max_cycles or self.max_cycles < 1:
            raise ValueError(f"max_cycles must be an integer >= 1, got {self.max_cycles}")


@dataclass(frozen=True)
class IpfReport:
    """Convergence diagnostics.

    ``max_residual`` is the largest |target - achieved| over all constrained
    marginal entries after the last cycle; ``residuals`` keeps that value
    for every cycle.
    """

    converged: bool
    cycles_used: int
    max_residual: float
    residuals: tuple[float, ...] = field(default=(), repr=False)


def check_targets(t: JointTable, targets: MarginalTargets) -> dict[str, np.ndarray]:
    """Validate targets against ``t`` and return them as arrays in table order."""
    if not targets:
        raise InvalidTargets("at least one marginal target is required")
    out = {}
    for name in t.names:
        if name not in targets:
            continue
        dist = np.asarray(targets[name], dtype=float)
        k = t.variable(name).cardinality
        if dist.shape != (k,):
            raise InvalidTargets(
                f"target for '{name}' needs {k} probabilities, got {dist.size}"
            )
        if not np.all(np.isfinite(dist)) or np.any(dist < 0) or np.any(dist > 1):
            raise InvalidTargets(f"target for '{name}' has entries outside [0, 1]")
        if abs(dist.sum() - 1.0) > TARGET_TOLERANCE:
            raise InvalidTargets(
                f"target for '{name}' sums to {dist.sum()!r}, expected 1"
            )
        # each pass then restores mass 1 exactly
        out[name] = dist / dist.sum()
    for name in targets:
        t.axis(name)
    return out


def _check_reachable(cells: np.ndarray, axis: int, var, target: np.ndarray):
    current = cells.sum(axis=tuple(i for i in range(cells.ndim) if i != axis))
    bad = np.flatnonzero((current <= 0) & (target > 0))
    if bad.size:
        state = var.states[bad[0]]
        raise TargetUnreachable(
            f"target for '{var.name}' puts mass {float(target[bad[0]])!r} on state "
            f"'{state}' but every supporting cell is zero"
        )
    return current


def _scale_axis(cells: np.ndarray, axis: int, var, target: np.ndarray) -> np.ndarray:
    current = _check_reachable(cells, axis, var, target)
    ratio = np.divide(target, current, out=np.zeros_like(target), where=current > 0)
    shape = [1] * cells.ndim
    shape[axis] = -1
    return cells * ratio.reshape(shape)


def _cycle(cells: np.ndarray, plan) -> np.ndarray:
    for axis, var, target in plan:
        cells = _scale_axis(cells, axis, var, target)
    return cells


def _residual(cells: np.ndarray, plan) -> float:
    worst = 0.0
    for axis, _, target in plan:
        current = cells.sum(axis=tuple(i for i in range(cells.ndim) if i != axis))
        worst = max(worst, float(np.max(np.abs(current - target))))
    return worst


def _plan(t: JointTable, targets: MarginalTargets):
    checked = check_targets(t, targets)
    return [(t.axis(name), t.variable(name), dist) for name, dist in checked.items()]


def fit_cycle(current: JointTable, targets: MarginalTargets) -> JointTable:
    """One full pass over the constrained variables in declared table order."""
    plan = _plan(current, targets)
    return JointTable(current.variables, _cycle(current.cells, plan))


def marginal_residual(t: JointTable, targets: MarginalTargets) -> float:
    """Largest absolute gap between ``t``'s marginals and ``targets``."""
    return max(
        float(np.max(np.abs(marginal_dist(t, name) - dist)))
        for name, dist in check_targets(t, targets).items()
    )


def ipf_adjust(
    start: JointTable,
    targets: MarginalTargets,
    config: IpfConfig | None = None,
) -> tuple[JointTable, IpfReport]:
    """Fit ``start`` to the target marginals, preserving its odds ratios.

    Runs full cycles until the largest marginal residual drops to
    ``config.tolerance``. Zero cells stay zero; a target that needs mass
    where every supporting cell is zero raises :class:`TargetUnreachable`
    before any iteration. Exhausting ``config.max_cycles`` raises
    :class:`NotConverged` carrying the partial table and report.
    """
    config = config or IpfConfig()
    plan = _plan(start, targets)
    for axis, var, target in plan:
        _check_reachable(start.cells, axis, var, target)

    cells = start.cells
    residuals = []
    for cycle in range(1, config.max_cycles + 1):
        cells = _cycle(cells, plan)
        residuals.append(_residual(cells, plan))
        if residuals[-1] <= config.tolerance:
            report = IpfReport(True, cycle, residuals[-1], tuple(residuals))
            return JointTable(start.variables, cells), report

    report = IpfReport(False, config.max_cycles, residuals[-1], tuple(residuals))
    table = JointTable(start.variables, cells)
    raise NotConverged(
        f"IPF did not reach tolerance {config.tolerance} in {config.max_cycles} "
        f"cycles (max residual {report.max_residual:.3e})",
        table=table,
        report=report,
    )
