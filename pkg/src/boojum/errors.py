"""Exception types shared across the package."""


class BoojumError(Exception):
    """Base class for all package errors."""


class ConfigError(BoojumError):
    """Invalid or unreadable experiment configuration."""


class UnsupportedDomainError(BoojumError):
    """Operation restricted to a narrower class of domains than requested."""


class DegeneratePointError(BoojumError):
    """A geometric query was made at a point where it is undefined."""


class OutOfBandError(BoojumError):
    """Point lies outside the tubular neighborhood of the boundary."""


class ParameterError(BoojumError):
    """Scalar parameter outside its admissible range."""


class ResolutionError(BoojumError):
    """Mesh spacing too coarse for the requested core size."""


class SeedSeparationError(BoojumError):
    """Requested defect seeds are too close to each other or to the boundary."""


class TopologyError(BoojumError):
    """Seed charges incompatible with the boundary degree."""


class DivergenceError(BoojumError):
    """Descent produced a non-finite energy or field."""


class ClusterOverflowError(BoojumError):
    """A bad-set cluster grew beyond the admissible covering diameter."""


class NormalizationError(BoojumError):
    """|u| too small to normalize on a winding loop."""


class NonIntegerWindingError(BoojumError):
    """Accumulated phase along a loop is not an integer multiple of 2*pi."""


class IndeterminateOrientationError(BoojumError):
    """Field value exactly orthogonal to the anchoring direction."""


class InconsistentIndexError(BoojumError):
    """Boundary index changed between admissible probe radii."""


class TopologyAuditError(BoojumError):
    """Detected charges violate the global degree identity."""


class FitError(BoojumError):
    """Regression requested on an unusable sweep (too few points)."""
