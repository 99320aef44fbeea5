"""Exception hierarchy shared by the solvers and the CLI."""


class PersuasionError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InvalidInstanceError(PersuasionError, ValueError):
    """Malformed or invariant-violating instance, scheme or file."""

    exit_code = 2

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class InvalidSubsetError(InvalidInstanceError):
    pass


class DimensionMismatchError(InvalidInstanceError):
    pass


class InvalidDistributionError(InvalidInstanceError):
    pass


class WrongArityError(InvalidInstanceError):
    """The operation only applies to a specific number of states."""


class UnknownStateError(InvalidInstanceError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown state"


class InstanceTooLargeError(PersuasionError):
    exit_code = 3


class UnsupportedObjectiveError(PersuasionError):
    exit_code = 4


class SolverStalledError(PersuasionError):
    """Iteration cap hit; ``best_bound`` is the last objective reached."""

    exit_code = 5

    def __init__(self, message, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound


class InfeasibleError(PersuasionError):
    pass
