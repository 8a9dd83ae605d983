"""Exception hierarchy.

``InputError`` covers bad user input and invalid parameters (CLI exit code 2);
``NumericalError`` covers failures of a computation on valid input (exit code 1).
"""

from typing import Optional


class ImpaError(Exception):
    """Base class for all errors raised by the toolkit."""


class InputError(ImpaError, ValueError):
    """Invalid parameters or user input."""


class NumericalError(ImpaError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input."""


class SpecValidationError(InputError):
    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = f"line {line}, " if line is not None else ""
        super().__init__(f"{location}field '{field}': {message}")


class EmptyGrid(InputError):
    pass


class DegenerateCalibration(InputError):
    pass


class InvalidOrder(InputError):
    pass


class EmptyCascade(InputError):
    pass


class OutputWriteError(InputError):
    def __init__(self, path, error: OSError):
        self.path = path
        super().__init__(f"cannot write {path}: {error.strerror or error}")


class ConvergenceFailure(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NonPositiveStiffness(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


class OutOfTunableRange(NumericalError):
    pass


class FrequencyMismatch(NumericalError):
    pass


class SingularNetwork(NumericalError):
    def __init__(self, message: str, frequency: Optional[float] = None):
        self.frequency = frequency
        if frequency is not None:
            message = f"{message} at {frequency:.6e} Hz"
        super().__init__(message)


class Unstable(NumericalError):
    def __init__(self, message: str, critical_pump: float):
        self.critical_pump = critical_pump
        super().__init__(f"{message} (critical r_p = {critical_pump:.6g} ohm)")
