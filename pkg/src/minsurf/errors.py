"""Exception hierarchy shared by every module."""


class MinsurfError(Exception):
    """Base class for all library errors."""


class AlgebraMismatch(MinsurfError, TypeError):
    """Operands tagged with different algebras were combined."""


class ZeroDivisorError(MinsurfError, ArithmeticError):
    """Inversion of a Lorentz number on (or numerically near) the null cone."""

    def __init__(self, value, operation="inv"):
        self.value = value
        self.operation = operation
        super().__init__(f"{operation}: {value!r} is a zero divisor")


class DivisionByZero(MinsurfError, ZeroDivisionError):
    """Inversion of a complex number of (numerically) zero modulus."""

    def __init__(self, value, operation="inv"):
        self.value = value
        self.operation = operation
        super().__init__(f"{operation}: {value!r} has zero modulus")


class LnBranchError(MinsurfError, ValueError):
    """Logarithm evaluated outside its principal region."""


class ParseError(MinsurfError, ValueError):
    def __init__(self, message, position, source=""):
        self.message = message
        self.position = position
        self.source = source
        super().__init__(f"{message} (at offset {position})")


class EmptyDomain(MinsurfError, ValueError):
    pass


class MissingClosedForm(MinsurfError, ValueError):
    pass


class PathLeavesDomain(MinsurfError, ValueError):
    pass


class QuadratureNonConvergence(MinsurfError, RuntimeError):
    pass


class ConditionViolation(MinsurfError, ValueError):
    pass


class DegenerateSample(MinsurfError, ValueError):
    pass


class NullNormal(MinsurfError, ValueError):
    pass


class ScalarDegenerate(MinsurfError, ValueError):
    pass


class BadFamilyIndex(MinsurfError, ValueError):
    pass


class NoImplicitEquation(MinsurfError, LookupError):
    pass


class NoPregeodesic(MinsurfError, LookupError):
    pass


class UnknownSurface(MinsurfError, KeyError):
    def __str__(self):
        return f"unknown surface {self.args[0]!r}" if self.args else "unknown surface"


class ValidationFailed(MinsurfError, ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"validation failed for {report.name!r}")
