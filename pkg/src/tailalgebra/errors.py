"""Exception hierarchy shared by every module of the package."""


class TailAlgebraError(Exception):
    """Base class for all errors raised by tailalgebra."""


class InvalidClass(TailAlgebraError, ValueError):
    """A tail class or representative violates its parameter constraints."""


class DegenerateConstant(TailAlgebraError, ValueError):
    """Scaling by zero (the expression should have been constant-folded)."""


class NoRoot(TailAlgebraError):
    """A moment equation has no root inside the search bracket."""


class NoRepresentative(TailAlgebraError):
    """The class has no sampleable tail representative (super-light tails)."""


class UnsupportedFamily(TailAlgebraError, KeyError):
    """Distribution family is unknown to the catalog."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class LogNormalTail(UnsupportedFamily):
    """Family has log-normal-type tails, which the algebra cannot represent."""


class UnsupportedSampler(TailAlgebraError):
    """Family has a known tail class but no sampler or density."""


class InsufficientTail(TailAlgebraError):
    """Too few order statistics / tail samples for an estimator."""


class DSLError(TailAlgebraError):
    """Error in a model program, optionally tied to a source position."""

    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self):
        if self.line is None:
            return self.message
        return f"{self.line}:{self.col}: {self.message}"

    def to_json(self):
        return {"error": type(self).__name__, "message": self.message,
                "line": self.line, "col": self.col}


class DSLSyntaxError(DSLError):
    pass


class UnknownFunction(DSLError):
    pass


class UnknownDistribution(DSLError):
    pass


class ArityError(DSLError):
    pass


class UndefinedVariable(DSLError):
    pass


class CycleError(DSLError):
    pass


class NonInvertiblePath(TailAlgebraError):
    """Posterior query crosses an operation with no inverse."""


class MultiplePaths(TailAlgebraError):
    """Parameter reaches an observation along more than one route."""
