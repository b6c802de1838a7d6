"""Exception hierarchy shared by every stage of the pipeline."""


class CSError(ValueError):
    """Base class for all package errors."""

    kind = "error"


class InvalidDimensionError(CSError):
    kind = "invalid-dimension"


class InvalidParameterError(CSError):
    kind = "invalid-parameter"


class DegenerateInputError(CSError):
    kind = "degenerate-input"


class RankDeficiencyError(CSError):
    """Least-squares system on the active set is singular."""

    kind = "rank-deficiency"

    def __init__(self, active_set, message=None):
        self.active_set = tuple(int(i) for i in active_set)
        if message is None:
            message = f"singular least-squares system on active set {list(self.active_set)}"
        super().__init__(message)


class ContainerError(CSError):
    """A binary or text artifact failed to parse."""

    kind = "malformed-container"
