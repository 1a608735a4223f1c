"""Exception types shared across the package."""


class OpmonError(Exception):
    """Base class for all package errors."""


class DomainError(OpmonError, ValueError):
    """A point, eigenvalue or interval falls outside a function's domain."""


class SymmetryError(OpmonError, ValueError):
    """A matrix that should be Hermitian is not."""


class EvaluationError(OpmonError, ArithmeticError):
    """A function produced a non-finite value or a needed derivative is missing."""


class ConstantFunctionError(OpmonError, ValueError):
    """A transform that needs f'(1) > 0 received a (numerically) constant function."""


class SamplingError(OpmonError, RuntimeError):
    """The random sampler could not satisfy its constraints in the allotted attempts."""
