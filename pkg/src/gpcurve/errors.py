"""Exception types raised by the library.

Each class carries the CLI exit code for its category.
"""


class GpcurveError(Exception):
    exit_code = 2


class ConfigError(GpcurveError):
    exit_code = 1


class NonConvergence(GpcurveError):
    exit_code = 2


class Unsolvable(GpcurveError):
    """The right-hand side of a projected problem fails its solvability condition."""

    exit_code = 2


class OutsideTube(GpcurveError):
    exit_code = 2


class GeometryMismatch(GpcurveError):
    exit_code = 2


class BudgetExceeded(GpcurveError):
    exit_code = 2


class Degenerate(GpcurveError):
    exit_code = 3


class Resonant(GpcurveError):
    exit_code = 3


class NotStationary(GpcurveError):
    """The curve does not satisfy the stationarity condition."""

    exit_code = 3


class NoAdmissibleEpsilon(GpcurveError):
    exit_code = 3


class ArtifactIOError(GpcurveError):
    exit_code = 4
