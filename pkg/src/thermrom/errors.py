"""Exception and warning types raised across the package."""


class ThermromError(Exception):
    """Base class for all package errors."""


class ConfigError(ThermromError, ValueError):
    """Invalid or unparsable configuration document."""


class GeometryUnresolvable(ThermromError):
    """A body cannot be represented on the requested voxel grid."""


class StabilityViolation(ThermromError):
    """Time step exceeds the explicit scheme's stability limit."""


class DegenerateInput(ThermromError, ValueError):
    """Input data cannot support the requested regression."""


class NoConvergence(ThermromError):
    """Optimizer failed to converge within its restart budget."""


class NotStationary(ThermromError):
    """Deviation series is still changing at the end of the trial."""


class IdMismatch(ThermromError, KeyError):
    """Body or source identifiers do not line up between two inputs."""

    def __str__(self):
        return Exception.__str__(self)


class NoOverlap(ThermromError, ValueError):
    """Two traces share no common time range."""


class NonIdentifiable(UserWarning):
    """Series carries no usable exponential signal."""
