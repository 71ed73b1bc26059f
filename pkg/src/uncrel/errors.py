"""Exception types raised by uncrel."""


class UncrelError(Exception):
    """Base class for all uncrel errors."""


class NumericError(UncrelError, ArithmeticError):
    """A numerical routine failed (non-convergence, non-unitary output, ...)."""


class InternalConsistencyError(UncrelError, AssertionError):
    """A relation that is a theorem was found violated.

    This never describes a physical effect. It means either an implementation
    bug or a Fock truncation too coarse for the input states. The offending
    report is attached as ``report``.
    """

    def __init__(self, message: str, report=None) -> None:
        super().__init__(message)
        self.report = report
