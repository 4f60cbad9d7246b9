"""Exception hierarchy shared by every module of the engine."""


class TableError(ValueError):
    """Base class for all engine errors."""


class NegativeCell(TableError):
    pass


class WrongCellCount(TableError):
    pass


class MassOutOfTolerance(TableError):
    pass


class DuplicateName(TableError):
    pass


class DuplicateState(TableError):
    pass


class TooFewStates(TableError):
    pass


class UnknownVariable(TableError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class UnknownState(TableError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class EmptyKeepSet(TableError):
    pass


class ZeroProbabilityEvidence(TableError):
    pass


class NotTwoByTwo(TableError):
    pass


class NotTwoCubed(TableError):
    pass


class ZeroCell(TableError):
    pass


class InvalidTargets(TableError):
    pass


class TargetUnreachable(TableError):
    pass


class NotConverged(TableError):
    """IPF ran out of cycles.

    The partially fitted table and its report stay attached so callers can
    inspect how far the fit got. ``result`` is filled in by the inference
    layer with the posterior computed from the partial table.
    """

    def __init__(self, message, table=None, report=None, result=None):
        super().__init__(message)
        self.table = table
        self.report = report
        self.result = result


class TargetInEvidence(TableError):
    pass


class NoSoftEvidence(EmptyKeepSet):
    pass


class KbError(TableError):
    """A knowledge-base document carries error diagnostics."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
