"""Exception and warning types shared across the package."""


class SpectimeError(Exception):
    """Base class for solver failures (CLI exit code 3)."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class NonConvergence(SpectimeError):
    """An iteration stopped before meeting its tolerance.

    ``best`` carries the best residual reached, when known.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SingularMatrix(SpectimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class Resonance(SingularMatrix):
    """A shifted system ``B + lambda*A`` (or ``I - sigma*M``) is singular."""


class AdmissibilityError(SpectimeError):
    """Points collide with each other or with the origin."""


class NewtonDivergence(SpectimeError):
    pass


class IllConditionedWarning(UserWarning):
    pass
