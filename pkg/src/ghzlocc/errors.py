"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An input violates an operation's precondition."""


class NumericalDomainError(ArithmeticError):
    """A numerical quantity fell outside its admissible domain (e.g. a negative eigenvalue)."""


class SdpConvergenceError(RuntimeError):
    """The interior-point solver hit its iteration cap without converging.

    ``residuals`` holds the last primal infeasibility, dual infeasibility and
    duality gap so callers can judge how close the run got.
    """

    def __init__(self, message: str, residuals: dict[str, float]):
        super().__init__(f"{message} (residuals: {residuals})")
        self.residuals = residuals
