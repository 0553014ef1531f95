"""Exception hierarchy shared by all modules."""


class TracevarError(Exception):
    """Base class for library errors."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class StructuralError(TracevarError):
    """Operands do not belong to the same algebra or have wrong shapes."""

    code = "structural"


class ContractError(TracevarError):
    """A precondition of an operation is violated."""

    code = "contract"


class DomainError(TracevarError):
    """A spectrum lies outside the domain of the requested function."""

    code = "domain"


class ParameterError(TracevarError):
    """A scalar parameter is out of its admissible range."""

    code = "parameter"


class PropertyViolation(TracevarError):
    """A certificate search found a candidate breaking a variational bound."""

    code = "property_violation"
