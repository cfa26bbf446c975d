"""Exception hierarchy shared by every module."""


class HomdistError(Exception):
    """Base class for all library errors."""


class ConfigurationError(HomdistError, ValueError):
    """Bad arguments, unsupported catalog combinations or malformed scenario files."""


class ContractError(HomdistError):
    """A pre/post-condition between pieces of the pipeline was violated."""


class DomainError(HomdistError, ValueError):
    """A function was evaluated outside its domain of validity (e.g. on a cut locus)."""


class CoverageError(HomdistError):
    """No planner piece claims a point of the source manifold."""


class AuditError(HomdistError):
    """An audit hard-failed; ``invariant`` names what broke."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant
