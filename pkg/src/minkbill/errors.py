"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for failures of a geometric primitive."""


class ConvergenceError(GeometryError):
    """An iterative solver stopped before reaching its tolerance.

    ``best`` holds the best iterate found and ``residual`` its residual.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BracketError(GeometryError):
    """No sign change could be bracketed for a root finder."""


class PatchEscapeError(GeometryError):
    """A chord left the local boundary patch it was supposed to stay in."""


class TransversalityError(GeometryError):
    """A transversal vector or chord direction is tangent to the boundary."""


class IntegrationError(Exception):
    """A moment integral did not reach the requested accuracy."""


class DegenerateFitError(ValueError):
    """The sample set does not determine the fitted object."""


class SpecError(ValueError):
    """Malformed body/field/patch specification. ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
