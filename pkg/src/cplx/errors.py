"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: ValidationError subclasses exit with 2,
NumericalError subclasses with 3, and OS-level I/O failures with 4.
"""


class CplxError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CplxError):
    """Input data or arguments violate a documented precondition."""


class EmptyClass(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class UnknownClass(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DegenerateVector(ValidationError):
    pass


class UndefinedEntropy(ValidationError):
    pass


class StratificationError(ValidationError):
    pass


class JoinError(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class ParseError(ValidationError):
    """A file failed strict parsing; carries the offending line number."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        self.reason = message
        super().__init__(f"{path}:{line}: {message}")


class NumericalError(CplxError):
    """A computation failed for numerical reasons."""


class SingularMatrix(NumericalError):
    pass
