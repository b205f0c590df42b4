"""Exception hierarchy for the foliation pipeline.

Every error carries the name of the subsystem that raised it so the CLI can
report machine-readable provenance.  ``VALIDATION`` errors map to exit code 2,
``NUMERICAL`` errors to exit code 3.
"""

VALIDATION = 2
NUMERICAL = 3


class FoliationError(Exception):
    """Base class for all pipeline errors."""

    exit_code = VALIDATION

    def __init__(self, message, module=None):
        super().__init__(message)
        self.module = module or type(self).default_module

    default_module = "foliation"

    def to_json(self):
        return {
            "error": type(self).__name__,
            "message": str(self),
            "module": self.module,
        }


# --- mesh_core ---------------------------------------------------------------

class ParseError(FoliationError):
    default_module = "mesh"


class NonManifold(FoliationError):
    default_module = "mesh"


class NonOrientable(FoliationError):
    default_module = "mesh"


class EmptyMesh(FoliationError):
    default_module = "mesh"


class DegenerateTriangle(FoliationError):
    default_module = "mesh"


class CurveNotEmbedded(FoliationError):
    default_module = "mesh"


class EdgeNotInMesh(FoliationError):
    default_module = "mesh"


class AlreadyClosed(FoliationError):
    default_module = "mesh"


# --- curves / decomposition graph --------------------------------------------

class CurvesIntersect(FoliationError):
    default_module = "curves"


class CurveNotSimple(FoliationError):
    default_module = "curves"


class InessentialCurve(FoliationError):
    default_module = "curves"


class NonPositiveHeight(FoliationError):
    default_module = "curves"


class DisconnectedGraph(FoliationError):
    default_module = "curves"


# --- metric graph / harmonic map ----------------------------------------------

class UnboundedObjective(FoliationError):
    default_module = "metric_graph"
    exit_code = NUMERICAL


class NonFiniteEnergy(FoliationError):
    default_module = "harmonic"
    exit_code = NUMERICAL


# --- cylinders / features ------------------------------------------------------

class DegenerateCylinder(FoliationError):
    default_module = "cylinders"
    exit_code = NUMERICAL


class NonPositiveCircumference(FoliationError):
    default_module = "cylinders"
    exit_code = NUMERICAL


class DimensionMismatch(FoliationError):
    default_module = "features"


class PeriodMismatchWarning(UserWarning):
    """Flattening period deviates from the circumference by more than 5%."""


# --- classifier ------------------------------------------------------------------

class SingleClass(FoliationError):
    default_module = "svm"


class TooFewRows(FoliationError):
    default_module = "svm"


# --- cli -----------------------------------------------------------------------

class BadParameter(FoliationError):
    default_module = "cli"
