"""Exception types shared across the solver modules."""


class GcellError(Exception):
    pass


class NonConvergence(GcellError):
    """Solver hit its step/time budget with residual above tolerance.

    Carries the partial result (if any) in ``.result`` so sweeps can log it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class CFLViolation(GcellError):
    pass


class DiffusionTooSmall(GcellError):
    pass


class SingularProblem(GcellError):
    pass


class InvalidModelParams(GcellError):
    pass


class DegenerateProfile(GcellError):
    pass


class ConfigError(GcellError):
    pass


class PartialFailure(GcellError):
    pass


class MissingColumn(GcellError):
    pass


class InsufficientData(GcellError):
    pass
