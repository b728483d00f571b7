"""Exception hierarchy shared by all modules."""


class NBodyError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(NBodyError, ValueError):
    pass


class InvalidInput(NBodyError, ValueError):
    pass


class Unsupported(NBodyError, ValueError):
    """Operation not defined for this body count or mass choice."""


class CollisionSingularity(NBodyError):
    """Two bodies closer than the collision threshold.

    ``pair`` holds the zero-based body indices of the offending pair.
    """

    def __init__(self, pair, distance, message=None):
        self.pair = tuple(pair)
        self.distance = float(distance)
        if message is None:
            message = (f"bodies {self.pair[0]} and {self.pair[1]} are "
                       f"{self.distance:.3e} apart")
        super().__init__(message)


class PartialCollision(CollisionSingularity):
    """The shape ``s`` of a blown-up state reached the binary collision locus."""


class DegenerateSize(NBodyError):
    """Size r = 0 where a positive size is required (total collision)."""


class NumericalFailure(NBodyError):
    """An iterative method did not converge.

    ``info`` carries whatever diagnostics the failing routine collected.
    """

    def __init__(self, message, **info):
        self.info = info
        super().__init__(message)


class IntegrationError(NBodyError):
    """Raised by the integrator; ``trajectory`` holds the partial result."""

    def __init__(self, message, trajectory=None):
        self.trajectory = trajectory
        super().__init__(message)


class StiffnessFailure(IntegrationError):
    pass


class BudgetExceeded(IntegrationError):
    pass


class EmptyFamily(NBodyError):
    """No curve exists for the requested (h, J); ``critical_J`` is the bound."""

    def __init__(self, message, critical_J):
        self.critical_J = float(critical_J)
        super().__init__(message)


class ConfigError(NBodyError):
    """Run-configuration problems; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
