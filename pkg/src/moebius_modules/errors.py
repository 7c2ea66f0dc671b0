"""Exception classes shared across the package."""


class MoebiusError(Exception):
    """Base class for all errors raised by ``moebius_modules``."""


class NotPositive(MoebiusError):
    """Raised when an operator expected to be positive definite is not."""


class NotNormalizable(MoebiusError):
    """Raised when an almost-involution cannot be repaired to an involution."""


class NoGrading(MoebiusError):
    """Raised when a graded operation is requested on an ungraded algebra."""


class NotFinite(MoebiusError):
    """Raised when a projective point has no finite representative."""


class NotInG(MoebiusError):
    """Raised when a block matrix is not of the form [[a, b], [b, a]] with a +- b invertible."""


class NotInvolution(MoebiusError):
    """Raised when an operator expected to square to the identity does not."""


class Singular(MoebiusError):
    """Raised when an operator that must be inverted is (numerically) singular."""


class ZeroAlpha(MoebiusError):
    """Raised when a zero scalar is passed where a nonzero one is required."""


class NormTooLarge(MoebiusError):
    """Raised when a contraction of norm strictly below one is required."""


class NotInCommutant(MoebiusError):
    """Raised when an operator fails to commute with the representation."""


class NotUnitary(MoebiusError):
    """Raised when an operator expected to be unitary is not."""


class InvalidModule(MoebiusError):
    """Raised when a Fredholm or polarized module fails validation."""


class NotCompatible(MoebiusError):
    """Raised when an involution is not compatible with a polarized module."""


class DegenerateSplit(MoebiusError):
    """Raised when E and gamma(E) fail to span the whole space."""


class EndpointMismatch(MoebiusError):
    """Raised when composing generalized Moebius maps with mismatched endpoints."""


class NotSPD(MoebiusError):
    """Raised when a metric tensor is not symmetric positive definite."""


class SchemaError(MoebiusError):
    """Raised when a scenario or metric file does not match its schema."""
