"""Exception hierarchy shared by the analysis modules."""


class EpnlabError(Exception):
    """Base class for errors raised by epnlab."""


class SpecError(EpnlabError, ValueError):
    """An input specification is inconsistent or out of range."""


class AnalysisError(EpnlabError):
    """A numerical analysis could not be completed."""


class UnsupportedSizeError(AnalysisError):
    """Matrix is larger than the operation's conditioning guard allows."""


class ConvergenceError(AnalysisError):
    """Iterative root finding did not converge.

    The best iterate is kept on ``best`` so callers can inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NotNilpotentError(AnalysisError):
    pass


class NotEPNError(AnalysisError):
    pass


class EvolutionError(AnalysisError):
    """State became non-finite during time stepping."""

    def __init__(self, message, last_good_time):
        super().__init__(message)
        self.last_good_time = last_good_time
