"""Exception hierarchy shared by all fitters."""


class EllipseFitError(Exception):
    """Base class for every error raised by this package."""


class NotAnEllipse(EllipseFitError):
    """The conic violates the ellipse condition b^2 - ac < 0."""


class DegenerateConic(EllipseFitError):
    """The conic has the ellipse signature but no real locus (or a single point)."""


class RankDeficient(EllipseFitError):
    """Least-squares design matrix lost column rank."""


class SingularSystem(EllipseFitError):
    """Square 5x5 system for the minimal fit is singular."""


class NoConvergence(EllipseFitError):
    """An iteration exhausted its budget without meeting its tolerance."""


class SingularJacobian(EllipseFitError):
    """Foot-point Jacobian is numerically singular."""


class BadInitial(EllipseFitError):
    """Starting parameters do not describe a valid ellipse."""


class DegenerateStep(EllipseFitError):
    """Stacked Gauss-Newton Jacobian is rank deficient."""


class NoValidSubset(EllipseFitError):
    """Every random minimal subset failed to produce an ellipse."""


class EmptyPointSet(EllipseFitError, ValueError):
    """A point set must contain at least one point."""


class MalformedFile(EllipseFitError, ValueError):
    """A point file could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
