"""Exception hierarchy.

The CLI prints ``type(err).__name__`` verbatim, so the class names double as
user-facing error codes.
"""


class HilbertSepError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(HilbertSepError):
    pass


class MalformedHyperplane(GeometryError):
    pass


class Unbounded(GeometryError):
    pass


class EmptyInterior(GeometryError):
    pass


class NotInterior(GeometryError):
    """A point lies on or outside the boundary of the domain.

    ``facet`` is the zero-based index of the first facet whose clearance is
    not strictly positive.
    """

    def __init__(self, message, facet=None):
        super().__init__(message)
        self.facet = facet


class CoincidentPoints(GeometryError):
    pass


class NegativeRadius(GeometryError):
    pass


class SingularMap(GeometryError):
    pass


class ImageUnbounded(GeometryError):
    pass


class DimensionMismatch(GeometryError):
    pass


class LPError(HilbertSepError):
    pass


class IterationLimit(LPError):
    pass


class TrainingError(HilbertSepError):
    pass


class NotSeparable(TrainingError):
    pass


class EmptyClass(TrainingError):
    pass


class OracleError(HilbertSepError):
    pass


class HyperplaneMissesDomain(OracleError):
    pass


class PointOnHyperplane(OracleError):
    pass


class DimensionNot2(OracleError):
    pass
