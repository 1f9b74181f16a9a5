"""Exception hierarchy shared by every stage of the analysis."""


class LoopInvarError(Exception):
    """Base class for all errors raised by loopinvar."""


class LoopSyntaxError(LoopInvarError):
    def __init__(self, message, line=None, column=None, expected=None):
        self.line = line
        self.column = column
        self.expected = expected
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class NonPolynomialError(LoopSyntaxError):
    """Raised for function applications such as sin/cos in expressions."""


class ValidationError(LoopInvarError):
    pass


class DesugarError(LoopInvarError):
    pass


class MissingBinding(LoopInvarError):
    pass


class InvalidDistribution(LoopInvarError):
    pass


class UnsupportedSpectrum(LoopInvarError):
    """A characteristic polynomial has a factor without rational roots."""

    def __init__(self, residual: str):
        self.residual = residual
        super().__init__(f"characteristic polynomial has non-rational roots: residual factor {residual}")


class ClosureBudgetExceeded(LoopInvarError):
    pass


class DefectiveLeak(LoopInvarError):
    pass


class NoDefectiveVariables(LoopInvarError):
    pass


class TooLarge(LoopInvarError):
    pass


class BudgetExceeded(LoopInvarError):
    def __init__(self, message, reached: int):
        self.reached = reached
        super().__init__(message)


class Timeout(LoopInvarError):
    pass
