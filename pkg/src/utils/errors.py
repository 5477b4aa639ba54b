from typing import Dict, Optional


class FfraceError(Exception):
    """Base class for every error the library raises on purpose."""

    exit_code = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> Dict:
        record = {"error": type(self).__name__, "message": self.message}
        record.update({k: v for k, v in self.details.items() if v is not None})
        return record


class FieldError(FfraceError):
    pass


class PolynomialError(FfraceError):
    pass


class CurveError(FfraceError):
    pass


class NonMinimalModelError(CurveError):
    pass


class TwistError(CurveError):
    pass


class WorkBoundExceeded(FfraceError):
    """A configured work bound would be exceeded; `bound` names it."""

    exit_code = 2

    def __init__(self, message: str, bound: str, limit: Optional[int] = None, requested: Optional[int] = None):
        super().__init__(message, bound=bound, limit=limit, requested=requested)
        self.bound = bound
        self.limit = limit
        self.requested = requested


class StabilizationError(FfraceError):
    pass


class FunctionalEquationError(FfraceError):
    pass


class PurityError(FfraceError):
    pass


class UlmerSpecError(FfraceError):
    pass


class QuadratureError(FfraceError):
    pass


class ConfigError(FfraceError):
    pass


class InvalidInputError(FfraceError):
    pass


class BoundViolation(FfraceError):
    """An exactly computed value breaks a proven bound; points at a defect, not at the input."""
