"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of an operation (bad index, shape, range)."""


class DegenerateParameterizationError(DomainError):
    """The c_0 = sqrt(1 - sum c_j^2) chart breaks down (c_0 <= 0)."""


class SingularLikelihoodError(ArithmeticError):
    """A positive count sits on a zero intensity/amplitude, so ln L = -inf."""


class IncompleteProtocolError(ValueError):
    """Measurement protocol cannot identify the state (singular I, or H fails completeness)."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration hit ``max_iter`` (or mixing underflow) before reaching ``tol``.

    The best iterate and diagnostics travel with the exception so callers can
    still report them.
    """

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics


class EnvelopeError(RuntimeError):
    """Rejection-sampling envelope is too loose (acceptance rate below 1e-3)."""


class BoundaryLeakError(RuntimeError):
    """An eigenfunction does not decay before the edge of the grid."""


class BoundaryLeakWarning(UserWarning):
    pass


class CompletenessWarning(UserWarning):
    """The information matrix at the solution does not certify a complete protocol."""


class SampleSizeWarning(UserWarning):
    pass
