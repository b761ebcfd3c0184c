"""Exception hierarchy shared across the package."""


class CCRError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(CCRError, ValueError):
    """Malformed graph: self-loop, duplicate edge, unknown node id, or cycle."""


class AssumptionError(CCRError, ValueError):
    """Graph violates one of the root/leaf/cutpoint assumptions."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"graph violates assumptions: {report}")


class DomainError(CCRError, ValueError):
    """Argument outside the domain of an operation."""


class ResourceError(CCRError, RuntimeError):
    """Exact computation would exceed the enumeration budget."""


class UndefinedEstimandError(CCRError, ArithmeticError):
    """Estimand or decomposition is undefined (division by zero)."""


class UndefinedRAEError(UndefinedEstimandError):
    """Relative error against a zero reference. Carries the absolute error."""

    def __init__(self, absolute_error):
        self.absolute_error = absolute_error
        super().__init__(
            f"relative error undefined for zero reference (absolute error {absolute_error!r})"
        )


class NumericalError(CCRError, ArithmeticError):
    """Singular or ill-conditioned linear system."""


class TransportError(CCRError, RuntimeError):
    """Remote request failed after all retries."""

    def __init__(self, query_id, message):
        self.query_id = query_id
        super().__init__(f"{query_id}: {message}")


class DataQualityError(CCRError, RuntimeError):
    """Response store has too many missing or inconclusive answers."""


class CoverageError(CCRError, KeyError):
    """Estimates are missing for quantities required by the plan."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing estimates for: {', '.join(self.missing)}")
