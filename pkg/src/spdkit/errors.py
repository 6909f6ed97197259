"""Exception types shared across the package."""


class SpdKitError(Exception):
    """Base class for every error raised by this package."""


class IoError(SpdKitError):
    """A path could not be read or written."""


class FormatError(SpdKitError):
    """A file failed to parse: bad magic, bad header, or truncated payload."""


class ClassOutOfRange(SpdKitError):
    """A semantic class ID is >= the declared class count."""


class EmptyContour(SpdKitError):
    """A descriptor was requested against an empty contour point set."""


class DegenerateDistance(SpdKitError):
    """Every contour distance is zero, so max-distance normalization is undefined."""


class OutOfRange(SpdKitError):
    """A normalized distance lies beyond the outermost radius edge."""


class NonDivisibleDims(SpdKitError):
    """Map dimensions are not divisible by the pooling factor."""


class ShapeMismatch(SpdKitError):
    """Tensor arguments disagree on a dimension that must match."""


class NonFinite(SpdKitError):
    """A value that must be finite is NaN or infinite."""


class NonPositiveProbability(SpdKitError):
    """A probability map contains negative entries."""


class BadBinIndex(SpdKitError):
    """A requested descriptor bin does not exist for the map's binning."""
