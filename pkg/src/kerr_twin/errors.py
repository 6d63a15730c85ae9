"""Exception hierarchy. Each class maps onto one CLI exit code."""


class KerrTwinError(Exception):
    exit_code = 2


class InvalidInputError(KerrTwinError, ValueError):
    exit_code = 1


class NumericalError(KerrTwinError, ArithmeticError):
    exit_code = 2


class AccuracyError(NumericalError):
    """Truncation too aggressive for the requested quantity."""


class ResourceError(KerrTwinError):
    exit_code = 3
