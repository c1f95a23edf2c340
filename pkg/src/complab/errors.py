"""Exception hierarchy.

Every validation failure carries the name of the violated invariant and the
measured violation so callers can report it without re-computing anything.
"""


class ComplabError(Exception):
    pass


class ValidationError(ComplabError, ValueError):
    invariant = "invalid"

    def __init__(self, message, *, magnitude=None, index=None):
        super().__init__(message)
        self.magnitude = magnitude
        self.index = index

    def report(self):
        return {
            "invariant": self.invariant,
            "magnitude": self.magnitude,
            "index": self.index,
            "message": str(self),
        }


class NotFinite(ValidationError):
    invariant = "finite"


class NotHermitian(ValidationError):
    invariant = "hermitian"


class BadTrace(ValidationError):
    invariant = "unit-trace"


class NotPSD(ValidationError):
    invariant = "positive-semidefinite"


class NotUnitary(ValidationError):
    invariant = "unitary"


class BadDetectorState(ValidationError):
    invariant = "unit-norm"


class IncompleteSum(ValidationError):
    invariant = "completeness"


class PositivityBound(ValidationError):
    invariant = "positivity-bound"


class DimensionMismatch(ComplabError, ValueError):
    pass


class IncompatibleEndpoints(ComplabError, ValueError):
    pass


class ExcessDroppedMass(ComplabError, ValueError):
    pass


class UnknownScenario(ComplabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown scenario"


class ParseError(ComplabError, ValueError):
    pass


class InternalConsistencyError(ComplabError, ArithmeticError):
    """A computed quantity left its mathematically allowed range."""
