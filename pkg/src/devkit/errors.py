"""Exception hierarchy for devkit.

Every error that library code raises on purpose derives from DevkitError, so
the CLI can map any of them to a structured report and exit code 2 without
pattern matching on messages.  Names are part of the public surface: reports
carry ``type(exc).__name__``.
"""


class DevkitError(Exception):
    """Base class for all devkit errors."""

    def payload(self):
        """JSON-safe extra fields for structured error reports."""
        return {}


class NotAUnit(DevkitError):
    """Inversion was requested for a non-invertible element."""


class PrecisionExhausted(DevkitError):
    """A truncated-Laurent result has no correct coefficients left.

    Raised instead of silently truncating when an operation would need
    coefficients below the window floor.
    """


class EndoDomainMismatch(DevkitError):
    """The endomorphism is not defined on this ring descriptor."""


class MorphismDomainMismatch(DevkitError):
    """The element does not belong to the morphism's source ring."""


class MissingEquivarianceTag(DevkitError):
    """A ring morphism cannot be certified to commute with a needed endo."""


class RingMismatch(DevkitError):
    """Operands live over different ring descriptors."""


class UnknownGenerator(DevkitError):
    """A word references a label the monoid does not declare."""


class LevelExceedsPrecision(DevkitError):
    """A lift level beyond the ring's nilpotency bound was requested."""


class NotEtale(DevkitError):
    """An operation requiring an etale module received a non-etale one."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

    def payload(self):
        return {"witness": self.witness}


class SizeGuard(DevkitError):
    """A brute-force dimension exceeded the configured cap."""

    def __init__(self, message, dim=None, cap=None):
        super().__init__(message)
        self.dim = dim
        self.cap = cap

    def payload(self):
        return {"dim": self.dim, "cap": self.cap}


class FixedSubringUnsupported(DevkitError):
    """No FixedSubringEntry is available for this (ring, S') pair."""


class ResidualActionEscapes(DevkitError):
    """A generator outside S' does not stabilize the solution set."""

    def __init__(self, message, generator=None, witness=None):
        super().__init__(message)
        self.generator = generator
        self.witness = witness

    def payload(self):
        return {"generator": self.generator, "witness": self.witness}


class LiftObstruction(DevkitError):
    """A level-lift correction equation is unsolvable (H^1 shadow nonzero)."""

    def __init__(self, message, level=None, residual=None):
        super().__init__(message)
        self.level = level
        self.residual = residual

    def payload(self):
        return {"level": self.level, "residual": self.residual}


class ExtensionBudgetExceeded(DevkitError):
    """The tower search ran out of budget before reaching full rank."""

    def __init__(self, message, best_level=None, best_exponents=None):
        super().__init__(message)
        self.best_level = best_level
        self.best_exponents = best_exponents

    def payload(self):
        return {"best_level": self.best_level, "best_exponents": self.best_exponents}


class NotSubtleFinite(DevkitError):
    """Submonoid data failed the bounded cofinality/maximality search."""


class ActionMismatch(DevkitError):
    """The declared ring action does not match the submonoid data."""


class SchemaError(DevkitError):
    """A problem file failed validation (CLI exit code 3)."""
