"""
Exception hierarchy for the tropical period engine.

Every error carries the name of the module that raised it so the front end
can print ``module: message`` without inspecting the exception type. Errors
raised while reading a manifest may also carry the line they refer to.
"""

from typing import Optional


class TropicalError(Exception):
    """Base class for all engine errors."""

    module = "tropical"

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.line = line

    def prefixed(self) -> str:
        if self.line is not None:
            return f"{self.module}: manifest:{self.line}: {self.message}"
        return f"{self.module}: {self.message}"


class LatticeError(TropicalError):
    module = "lattice_core"


class ComplexError(TropicalError):
    """Raised for malformed polyhedral complexes.

    ``kind`` is one of NonManifold, NonOrientable, DanglingFace or Invalid.
    """

    module = "polyhedral_complex"

    def __init__(self, kind: str, message: str, line: Optional[int] = None):
        super().__init__(f"{kind}: {message}", line)
        self.kind = kind


class AffineError(TropicalError):
    module = "affine_structure"


class SheafError(TropicalError):
    module = "sheaf_homology"


class HomologyError(TropicalError):
    module = "sheaf_homology"


class CycleError(TropicalError):
    module = "tropical_cycles"


class PeriodError(TropicalError):
    module = "period_engine"


class NormalizationError(PeriodError):
    pass


class OracleError(TropicalError):
    module = "analytic_oracle"


class ManifestError(TropicalError):
    """Raised by the manifest parser; ``kind`` is Syntax, DanglingId or DimensionMismatch."""

    module = "cli"

    def __init__(self, kind: str, message: str, line: Optional[int] = None):
        super().__init__(f"{kind}: {message}", line)
        self.kind = kind
