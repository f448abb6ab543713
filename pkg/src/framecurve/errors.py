"""Exception and warning types.

Errors are grouped by the CLI exit code they map to: ``ParseError`` (2),
``PreconditionError`` (3) and ``NumericalError`` (4).
"""

from __future__ import annotations


class FrameCurveError(Exception):
    """Base class for all package errors."""

    exit_code = 4


class ParseError(FrameCurveError):
    exit_code = 2

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class PreconditionError(FrameCurveError):
    exit_code = 3


class NumericalError(FrameCurveError):
    exit_code = 4


class SampleError(FrameCurveError):
    """Error tied to specific sample indices."""

    def __init__(self, message: str, indices=()):
        self.indices = [int(i) for i in indices]
        if self.indices:
            shown = ", ".join(str(i) for i in self.indices[:10])
            if len(self.indices) > 10:
                shown += ", ..."
            message = f"{message} (samples: {shown})"
        super().__init__(message)


class GridMismatch(PreconditionError):
    pass


class FieldMismatch(PreconditionError):
    pass


class NotClosed(PreconditionError):
    pass


class ClosureViolation(PreconditionError):
    pass


class ParityMismatch(PreconditionError):
    pass


class NotOnSphere(PreconditionError):
    pass


class ConstraintViolation(PreconditionError):
    pass


class NonMonotoneWarp(PreconditionError):
    pass


class InvalidK(PreconditionError):
    pass


class IncompleteMatrix(PreconditionError):
    pass


class EmptyInput(PreconditionError):
    pass


class ZeroQuaternionSample(SampleError, PreconditionError):
    exit_code = 3


class ZeroDerivativeSample(SampleError, PreconditionError):
    exit_code = 3


class DegenerateSpeed(SampleError, PreconditionError):
    exit_code = 3


class VanishingCurvature(SampleError, PreconditionError):
    exit_code = 3


class PointwiseOrthogonal(SampleError, NumericalError):
    exit_code = 4


class DegenerateFrame(NumericalError):
    pass


class DegenerateCurve(NumericalError):
    pass


class OrthogonalInputs(NumericalError):
    pass


class SameOrbit(NumericalError):
    pass


class AntipodalOrCoincident(NumericalError):
    pass


# warnings -----------------------------------------------------------------


class FrameCurveWarning(UserWarning):
    pass


class SingularSample(FrameCurveWarning):
    """A geodesic passes through a quaternionic path with a vanishing sample."""


class JordanAngleAtPi2(FrameCurveWarning):
    pass


class DegenerateSpectrum(FrameCurveWarning):
    pass


class NonConvergence(FrameCurveWarning):
    pass
