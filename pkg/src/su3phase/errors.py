"""Exception types raised when a construction or measurement is undefined."""


class Su3PhaseError(ValueError):
    """Base class for domain errors in this package."""


class NotUnitary(Su3PhaseError):
    pass


class NotNormalized(Su3PhaseError):
    pass


class DegenerateTriangle(Su3PhaseError):
    """The vertex parameters do not define a unique geodesic triangle."""


class UndefinedDecomposition(Su3PhaseError):
    """psi3 is collinear with psi1, so tau and chi are undefined."""


class InvalidOverlap(Su3PhaseError):
    """Endpoint overlap is not real, positive and below one; re-gauge first."""


class UndefinedPhase(Su3PhaseError):
    """An overlap in the phase expression vanishes."""


class OutOfRange(Su3PhaseError):
    pass


class NotCyclic(Su3PhaseError):
    """The element sequence does not return the input ray to itself."""


class IllConditionedFit(Su3PhaseError):
    pass
