"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`DomainError`
so the CLI can map it to exit status 1.
"""


class DomainError(Exception):
    """Base class for physics/numerics errors raised by this package."""


class SymmetryViolation(DomainError):
    def __init__(self, rule, indices, message=None):
        self.rule = rule
        self.indices = tuple(indices)
        msg = message or f"{rule} violated at {self.indices}"
        super().__init__(msg)


class DivergentTangent(DomainError):
    pass


class DivergentIntegral(DomainError):
    pass


class QuadratureFailure(DomainError):
    pass


class SelectionRule(DomainError):
    pass


class TriangleViolation(DomainError):
    pass


class OddJ(DomainError):
    pass


class LongRange(DomainError):
    pass


class CapExceeded(DomainError):
    pass


class ParseError(DomainError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
