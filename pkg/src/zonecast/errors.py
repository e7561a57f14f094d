"""Typed errors shared across the package."""


class ZonecastError(Exception):
    """Base class for all package errors."""


class EmptyIntersection(ZonecastError):
    """Series have no common timestamps."""


class ZeroVariance(ZonecastError):
    """Sample standard deviation below the degeneracy threshold."""


class TooShort(ZonecastError):
    """Series or matrix has too few rows for the requested operation."""


class FormatError(ZonecastError):
    """Input file violates the expected schema."""


class NoData(ZonecastError):
    """Input file contains no valid rows."""


class LengthMismatch(ZonecastError):
    """Paired series have different lengths."""


class LagTooLarge(ZonecastError):
    """Requested autocorrelation lag exceeds what the series supports."""


class NonPositiveWeight(ZonecastError):
    """Weight specification contains a non-positive entry."""


class ParameterMismatch(ZonecastError):
    """Two artifacts were produced with incompatible parameters."""


class RankDeficient(ZonecastError):
    """Design matrix is numerically rank deficient."""


class SchemaMismatch(ZonecastError):
    """Design matrix columns do not match the fitted model."""


class DegenerateSplit(ZonecastError):
    """Train/test split would leave one side empty."""


class DegenerateDof(ZonecastError):
    """Not enough observations for the adjusted fit statistic."""


class NotTemperatureDependent(ZonecastError):
    """Model has no temperature-bearing column to attack."""


class InsufficientData(ZonecastError):
    """Not enough clean data to calibrate a baseline."""
