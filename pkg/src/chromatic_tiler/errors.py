"""Exception hierarchy shared by every stage of the pipeline."""


class ChromaticError(Exception):
    """Base class for all library errors."""


class InputError(ChromaticError, ValueError):
    """Malformed or out-of-domain input."""


class UnsupportedError(ChromaticError):
    """Requested feature or dimension is outside what the library handles."""


class UnsupportedSizeError(UnsupportedError):
    """Problem exceeds a size guard (e.g. the fractional-cover LP)."""


class ConstructionError(ChromaticError):
    """A geometric object could not be built (unbounded, empty, degenerate)."""


class AssociationError(ConstructionError):
    """A site is not strictly inside its associated cell."""


class ResolutionError(ChromaticError):
    """A grid was too coarse to certify the requested property."""


class CertificateError(ChromaticError):
    """A certificate that should hold by construction failed.

    ``witness`` carries the offending point or pair when one is known.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class LiftViolation(CertificateError):
    """A sample point of the torus is not covered by the lifted cover."""
