"""
Custom Exceptions to handle qplr specific behavior on errors.
"""

from typing import Tuple


class QplrException(Exception):
    """
    qplr base exception. Handled at the outermost level (the CLI).
    All other exception types are subclasses of this exception type.
    """

    exit_code = 3


class OperationalException(QplrException):
    """
    Requires manual intervention and will stop the run.
    Most of the time, this is caused by an invalid Configuration.
    """

    exit_code = 2


class ConfigurationError(OperationalException):
    """
    Configuration error. Usually caused by invalid configuration.
    """


class NumericalStageError(QplrException):
    """
    Base class for errors raised by a numerical stage.
    """


class HermiticityError(NumericalStageError):
    """
    Operator handed to an eigensolver is not Hermitian.
    """


class SymmetryError(NumericalStageError):
    """
    Fourier coefficients of a potential violate v_{-k} = conj(v_k).
    """


class WindowError(NumericalStageError):
    """
    Truncation window is empty or too small for the requested operator.
    """


class SiteIndexError(NumericalStageError):
    """
    Site label outside the truncation window or violating an ordering constraint.
    """


class DimensionMismatchError(NumericalStageError):
    """
    Vector or operator sizes do not match.
    """


class ConvergenceError(NumericalStageError):
    """
    Iterative evaluation did not converge at the requested depth.
    """


class ContainmentError(NumericalStageError):
    """
    Time grid lets the propagation front reach the window edges.
    """


class DegenerateSpectrumError(NumericalStageError):
    """
    Every finite-difference slope of E(N) was classified as a gap jump.
    """


class FitError(NumericalStageError):
    """
    Light-cone front never reached the threshold, nothing to fit.
    """


class StageError(NumericalStageError):
    """
    Error re-raised by the verification pipeline with its stage tag.
    Keeps the exit code of the wrapped error.
    """

    def __init__(self, stage: str, error: Exception) -> None:
        self.stage = stage
        self.error = error
        self.exit_code = getattr(error, "exit_code", QplrException.exit_code)
        super().__init__(f"[{stage}] {type(error).__name__}: {error}")

    def __reduce__(self) -> Tuple[type, Tuple[str, Exception]]:
        return (StageError, (self.stage, self.error))


class WorkerError(QplrException):
    """
    A worker process exited before returning the result of its task.
    """


class CheckFailure(QplrException):
    """
    A consistency check finished but its tolerance was not met.
    """

    exit_code = 1
