"""Exception hierarchy.

Every error carries a stable ``code`` string so callers (notably the CLI)
can report and map failures without parsing messages.
"""

from __future__ import annotations


class ImproperPPError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.context = context

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.code}: {msg}" if not msg.startswith(self.code) else msg


class DomainError(ImproperPPError, ValueError):
    code = "DOMAIN"


class NonConvergedError(ImproperPPError, ArithmeticError):
    code = "NON_CONVERGED"


class RejectionStallError(ImproperPPError, RuntimeError):
    code = "REJECTION_STALL"


class OverlappingRegionsError(ImproperPPError, ValueError):
    code = "OVERLAPPING_REGIONS"


class ZeroIntensityError(ImproperPPError, ValueError):
    code = "ZERO_INTENSITY"


class DivergentIntensityError(ImproperPPError, ValueError):
    code = "DIVERGENT_INTENSITY"


class CoincidentCoordinatesError(ImproperPPError, ValueError):
    code = "COINCIDENT_COORDINATES"


class DegenerateSSQError(ImproperPPError, ValueError):
    code = "DEGENERATE_SSQ"


class TooFewSamplesError(ImproperPPError, ValueError):
    code = "TOO_FEW_SAMPLES"


class InconclusiveError(ImproperPPError, ArithmeticError):
    code = "INCONCLUSIVE"


class NonNormalizableError(ImproperPPError, ValueError):
    code = "NON_NORMALIZABLE"


class NotObservableError(ImproperPPError, ValueError):
    """Raised when sampling is requested on a region that is not observable."""

    code = "NOT_OBSERVABLE"

    def __init__(self, verdict: str, message: str = "", **context):
        super().__init__(message or verdict, verdict=verdict, **context)
        self.verdict = verdict
