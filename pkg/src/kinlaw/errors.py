"""Exception hierarchy.

Every error raised on bad data derives from :class:`DataError`; failures of the
numerics on otherwise valid data derive from :class:`NumericalError`. The CLI
maps the two families to distinct exit codes.
"""


class KinlawError(Exception):
    """Base class for all package errors."""


class DataError(KinlawError, ValueError):
    """Input data violates a precondition."""


class NumericalError(KinlawError, ArithmeticError):
    """A computation could not produce a meaningful result."""


# trajectory / io

class NonMonotonicTime(DataError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"timestamps not strictly increasing at index {index}")


class NonFiniteValue(DataError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"non-finite value at index {index}")


class TooFewSamples(DataError):
    pass


class NoLabels(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"missing column {column!r}")


class ParseError(DataError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


# filtering / differentiation

class CutoffAboveNyquist(DataError):
    pass


class SignalTooShort(DataError):
    pass


class NonUniformSampling(DataError):
    pass


# power law

class InsufficientSamples(DataError):
    def __init__(self, report, minimum):
        self.report = report
        self.minimum = minimum
        super().__init__(
            f"too few usable samples (need {minimum}): n_used={report.n_used} "
            f"n_total={report.n_total} n_below_tau={report.n_below_tau} "
            f"n_undefined={report.n_undefined}"
        )


class DegenerateDesign(NumericalError):
    def __init__(self, regressors, message=None):
        self.regressors = tuple(regressors)
        super().__init__(message or f"degenerate regressor(s): {', '.join(self.regressors)}")


class DomainError(DataError):
    pass


# synthetic paths

class DegeneratePath(DataError):
    def __init__(self, quantity, arc_length):
        self.quantity = quantity
        self.arc_length = arc_length
        super().__init__(f"{quantity} vanishes near arc length s={arc_length:.6g} m")


class NonFiniteSpeed(NumericalError):
    pass


class OutOfRange(DataError):
    pass


# statistics

class TooFewValues(DataError):
    pass


class TooFewRows(DataError):
    pass


class RankDeficient(NumericalError):
    pass


class InsufficientReplication(DataError):
    pass


class UnbalancedDesign(DataError):
    def __init__(self, missing):
        self.missing = tuple(missing)
        cells = ", ".join(f"{s}/{lvl}" for s, lvl in self.missing)
        super().__init__(f"unbalanced design, missing subject/level cells: {cells}")
