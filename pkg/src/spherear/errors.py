"""Exception hierarchy shared by all modules."""


class SphereARError(Exception):
    """Base class for library errors."""


class DimensionMismatchError(SphereARError, ValueError):
    """Two objects do not live in the same weighted space."""

    def __init__(self, left, right, what="vectors"):
        self.left = left
        self.right = right
        super().__init__(f"dimension mismatch between {what}: length {left} vs length {right}")


class GeometryError(SphereARError, ValueError):
    """A geometric construction is undefined (antipodal points and the like)."""


class ConvergenceError(SphereARError, RuntimeError):
    """An iterative procedure stopped before reaching its tolerance."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (final residual {residual:.3e})")


class DegenerateAutocovarianceError(SphereARError, ValueError):
    """The Toeplitz autocovariance matrix is singular or badly conditioned."""


class StationarityError(SphereARError, ValueError):
    """AR coefficients violate the root condition."""


class ProjectionError(SphereARError, ValueError):
    """A constraint projection cannot produce a point on the sphere."""


class FormatError(SphereARError, ValueError):
    """Input data or a model file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ModelVersionError(FormatError):
    """Model file carries an unsupported format tag."""
