class CPNSError(Exception):
    pass


class EdgeListParseError(CPNSError, ValueError):
    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class ValidationError(CPNSError, ValueError):
    pass


class GuardExceeded(ValidationError):
    """Input too large for a dense or enumerative routine."""


class DegenerateError(CPNSError, ValueError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


class ConvergenceError(CPNSError, ArithmeticError):
    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)
