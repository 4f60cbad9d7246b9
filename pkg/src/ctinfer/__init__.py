"""Odds-ratio preserving inference over discrete joint probability tables."""

from .errors import (
    DuplicateName,
    DuplicateState,
    EmptyKeepSet,
    InvalidTargets,
    KbError,
    MassOutOfTolerance,
    NegativeCell,
    NoSoftEvidence,
    NotConverged,
    NotTwoByTwo,
    NotTwoCubed,
    TableError,
    TargetInEvidence,
    TargetUnreachable,
    TooFewStates,
    UnknownState,
    UnknownVariable,
    WrongCellCount,
    ZeroCell,
    ZeroProbabilityEvidence,
)
from .inference import (
    Hard,
    QueryResult,
    Soft,
    Unknown,
    evidence_subtable,
    posterior,
    posterior_independent,
)
from .ipf import IpfConfig, IpfReport, fit_cycle, ipf_adjust, marginal_residual
from .kbio import Diagnostic, KbDocument, load_table, parse_kb, serialize_kb, to_table
from .table import (
    JointTable,
    VariableSpec,
    condition,
    layer_product_odds_ratio,
    local_odds_ratios,
    marginal_dist,
    marginalize,
    new_table,
    pairwise_odds_ratio,
    threeway_odds_ratio,
)

__version__ = "0.1.0"
