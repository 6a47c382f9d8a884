"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    pass


class OutOfArena(ValueError):
    pass


class InvalidActuation(ValueError):
    pass


class PlacementInfeasible(RuntimeError):
    pass


class BudgetExhausted(RuntimeError):
    """Raised when an episode charge would overdraw a design budget."""


class FormatError(ValueError):
    """A controller, arena or config document could not be parsed or violates its schema."""


class InvalidConfig(ValueError):
    pass


class InvalidInput(ValueError):
    pass


class ControllerFault(RuntimeError):
    """A controller produced a non-finite actuation."""
