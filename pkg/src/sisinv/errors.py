"""Exception hierarchy for the SIS toolkit."""


class SISError(Exception):
    """Base class for all errors raised by :mod:`sisinv`."""


class GridMismatch(SISError, ValueError):
    """A field does not belong to the grid it is used with."""


class NonFiniteField(SISError, ValueError):
    pass


class InitialDataError(SISError, ValueError):
    """Initial data violate the positivity hypotheses of the direct problem."""


class NegativeInitialData(InitialDataError):
    pass


class ZeroInfectedMass(InitialDataError):
    pass


class ZeroPopulationCell(InitialDataError):
    pass


class LinearSolveDiverged(SISError, RuntimeError):
    pass


class TrajectoryIncomplete(SISError, ValueError):
    pass


class ProfileOutOfBounds(SISError, ValueError):
    pass


class ForwardSolveError(SISError, RuntimeError):
    """A time step failed; ``step`` carries the failing step index."""

    def __init__(self, step, cause):
        super().__init__(f"forward step {step} failed: {cause}")
        self.step = step
        self.cause = cause
