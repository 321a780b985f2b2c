"""Exception types raised across the package."""


class ParameterDomainError(ValueError):
    """An interaction parameter lies outside its physical domain."""


class ZeroProbabilityError(ArithmeticError):
    """The heralding event has vanishing success probability."""


class UndefinedStatisticError(ArithmeticError):
    """A requested statistic is undefined for the given state (e.g. g2 of vacuum)."""


class GridTooCoarseError(RuntimeError):
    """A phase-space integral did not converge under step halving."""


class ConsistencyError(RuntimeError):
    """Two evaluations that must agree did not (e.g. a complex Wigner value)."""


class CutoffError(ValueError):
    """A Fock-space cutoff is too small for the requested accuracy."""
