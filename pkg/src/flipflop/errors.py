"""Exception hierarchy shared by the solver layers and the CLI."""


class FlipFlopError(Exception):
    """Base class for all engine errors."""


class InvalidInputError(FlipFlopError, ValueError):
    """Parameters or platforms violate the model's domain."""


class UnresolvedTieError(FlipFlopError):
    """A knife-edge subgame was reached without a resolution policy."""


class NoBestResponseError(FlipFlopError):
    """The responder's payoff supremum is approached but never attained."""


class BoundaryUnspecifiedError(FlipFlopError):
    """The organizational cost sits exactly on an existence threshold."""
