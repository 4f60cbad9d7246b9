"""Posterior queries under hard, soft and absent evidence.

Hard evidence is applied by exact conditioning. Soft evidence (a revised
marginal for a variable) is propagated by fitting the joint subtable of the
soft variables to the new marginals with IPF, then mixing the original
conditionals of the target over that adjusted joint:

    P(target=s | soft) = sum_x P(target=s | x) * P'(x)

where ``x`` runs over configurations of the soft variables and ``P'`` is
the adjusted joint. Variables without evidence are summed out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    NoSoftEvidence,
    NotConverged,
    TargetInEvidence,
    TargetUnreachable,
)
from .ipf import IpfConfig, IpfReport, check_targets, ipf_adjust
from .table import JointTable, condition, marginal_dist, marginalize


@dataclass(frozen=True)
class Hard:
    state: str


@dataclass(frozen=True)
class Soft:
    distribution: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "distribution", tuple(float(p) for p in self.distribution)
        )


@dataclass(frozen=True)
class Unknown:
    pass


Evidence = Mapping[str, "Hard | Soft | Unknown"]


@dataclass(frozen=True)
class QueryResult:
    target: str
    states: tuple[str, ...]
    posterior: np.ndarray
    method: str
    ipf: IpfReport | None = None

    def as_dict(self) -> dict[str, float]:
        return {s: float(p) for s, p in zip(self.states, self.posterior)}

    def __getitem__(self, state: str) -> float:
        return float(self.posterior[self.states.index(state)])


def split_evidence(
    t: JointTable, ev: Evidence, canonicalize: bool = True
) -> tuple[dict[str, str], dict[str, np.ndarray]]:
    """Validate evidence and split it into hard states and soft targets.

    Soft distributions that put all their mass on one state become hard
    evidence when ``canonicalize`` is set.
    """
    hard: dict[str, str] = {}
    soft: dict[str, np.ndarray] = {}
    for name, item in ev.items():
        var = t.variable(name)
        if isinstance(item, Unknown) or item is None:
            continue
        if isinstance(item, Hard):
            var.index(item.state)
            hard[name] = item.state
        elif isinstance(item, Soft):
            dist = check_targets(t, {name: item.distribution})[name]
            support = np.flatnonzero(dist)
            if canonicalize and support.size == 1:
                hard[name] = var.states[support[0]]
            else:
                soft[name] = dist
        else:
            raise TypeError(f"evidence for '{name}' must be Hard, Soft or Unknown")
    return hard, soft


def _prepare(t: JointTable, ev: Evidence, target: str, canonicalize: bool):
    t.axis(target)
    if target in ev and not isinstance(ev[target], Unknown):
        raise TargetInEvidence(f"target '{target}' also carries evidence")
    hard, soft = split_evidence(t, ev, canonicalize)
    return hard, soft, condition(t, hard)


def _conditionals(joint: JointTable, target: str) -> tuple[np.ndarray, np.ndarray]:
    """P(x) and P(target | x) from a table over soft variables plus the target.

    Configurations with P(x) = 0 get an all-zero conditional row.
    """
    cells = np.moveaxis(joint.cells, joint.axis(target), -1)
    px = cells.sum(axis=-1)
    cond = np.divide(
        cells, px[..., None], out=np.zeros_like(cells), where=px[..., None] > 0
    )
    return px, cond


def _mix(cond: np.ndarray, weights: np.ndarray) -> np.ndarray:
    post = np.tensordot(weights, cond, axes=weights.ndim)
    return np.clip(post / post.sum(), 0.0, 1.0)


def _no_soft_result(conditioned: JointTable, target: str, hard) -> "QueryResult":
    return QueryResult(
        target,
        conditioned.variable(target).states,
        marginal_dist(conditioned, target),
        "hard-only" if hard else "prior",
    )


def evidence_subtable(t: JointTable, ev: Evidence) -> JointTable:
    """Condition on hard evidence and marginalize onto the soft variables."""
    hard, soft = split_evidence(t, ev)
    if not soft:
        raise NoSoftEvidence("no soft evidence to build a subtable from")
    return marginalize(condition(t, hard), soft)


def posterior(
    t: JointTable,
    ev: Evidence,
    target: str,
    config: IpfConfig | None = None,
    canonicalize: bool = True,
) -> QueryResult:
    """Posterior over ``target`` with soft evidence propagated by IPF.

    The soft variables' joint subtable (after hard conditioning) is fitted
    to the soft marginals, which keeps the subtable's odds ratios, and the
    target's original conditionals are mixed over the fitted joint.

    Raises
    ------
    NotConverged
        IPF ran out of cycles. ``exc.result`` holds the posterior computed
        from the partially fitted subtable.
    """
    hard, soft, conditioned = _prepare(t, ev, target, canonicalize)
    if not soft:
        return _no_soft_result(conditioned, target, hard)

    joint = marginalize(conditioned, set(soft) | {target})
    sub = marginalize(joint, soft)
    px, cond = _conditionals(joint, target)
    states = joint.variable(target).states
    try:
        fitted, report = ipf_adjust(sub, soft, config)
    except NotConverged as exc:
        exc.result = QueryResult(
            target, states, _mix(cond, exc.table.cells), "odds-ratio", exc.report
        )
        raise
    return QueryResult(target, states, _mix(cond, fitted.cells), "odds-ratio", report)


def posterior_independent(
    t: JointTable, ev: Evidence, target: str, canonicalize: bool = True
) -> QueryResult:
    """Posterior treating the soft variables as independent.

    The adjusted joint is taken as the product of the soft marginals. This
    is exact only when the soft variables are independent in the
    (conditioned) table.
    """
    hard, soft, conditioned = _prepare(t, ev, target, canonicalize)
    if not soft:
        return _no_soft_result(conditioned, target, hard)

    joint = marginalize(conditioned, set(soft) | {target})
    px, cond = _conditionals(joint, target)
    weights = np.ones(())
    for v in joint.variables:
        if v.name in soft:
            weights = np.multiply.outer(weights, soft[v.name])
    if np.any((px <= 0) & (weights > 0)):
        raise TargetUnreachable(
            "independent weights put mass on a soft configuration with probability 0"
        )
    return QueryResult(target, joint.variable(target).states, _mix(cond, weights), "independence")
