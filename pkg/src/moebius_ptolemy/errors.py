"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


class AdmissibilityError(ValueError):
    """A quadruple repeats some entry three or four times."""


class DegenerateInputError(InputError):
    """Geometric input is degenerate (coincident points, identical circles, ...)."""


class ConvergenceError(RuntimeError):
    """A limit schedule was too short to certify convergence."""


class DescentTerminated(Exception):
    """The horosphere descent reached the bottom of the chain."""


class ValidationError(InputError):
    """Raised when a loaded space fails metric validation."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"space failed validation: {len(report.violations)} violation(s)")
