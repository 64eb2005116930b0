from typing import Any, Optional


class SpectralMetricError(Exception):
    """Base class for all errors raised by spectral_metric."""


class ArgumentError(SpectralMetricError, ValueError):
    pass


class CapacityError(ArgumentError):
    """Input exceeds the dense, desk-scale limits of the toolkit."""


class ContractError(SpectralMetricError):
    pass


class SchemaError(ArgumentError):
    pass


class ConvergenceError(SpectralMetricError, RuntimeError):
    """
    A numerical routine stopped without meeting its own certificate.

    Carries whatever partial answer was reached: the residual of an
    eigensolve, or the best bracket and witness of the distance solver.
    """

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        bracket: Optional[tuple[float, float]] = None,
        witness: Any = None,
    ):
        super().__init__(message)
        self.residual = residual
        self.bracket = bracket
        self.witness = witness
