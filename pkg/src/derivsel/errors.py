"""Exception types shared across the package."""


class DerivselError(Exception):
    """Base class for all package-specific failures."""


class ParameterError(DerivselError, ValueError):
    """A market or numeric parameter is outside its admissible domain."""


class ZeroPriceError(DerivselError):
    """An option spec has zero (or indistinguishable-from-zero) price."""


class SingularCompositionError(DerivselError):
    """A sensitivity matrix is singular or numerically near-singular."""


class CompositionInfeasibleError(DerivselError):
    """A composition became unpriceable mid-simulation.

    Carries the rebalance date and the offending spec so the failure can be
    located in a long study run.
    """

    def __init__(self, message, date=None, spec=None):
        super().__init__(message)
        self.date = date
        self.spec = spec


class NoAdmissibleCandidateError(DerivselError):
    """Every candidate in a selection search was inadmissible."""


class InfeasibleMarketError(DerivselError):
    """The candidate set cannot span both risk factors (rank < 2)."""


class ConfigError(DerivselError):
    """A run configuration failed to parse or validate."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
