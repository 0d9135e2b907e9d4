"""Exception hierarchy.

Two families matter to callers: input/domain problems (bad parameters,
arguments outside a formula's validity region) and numerical failures
(series that refuse to converge, inversion contours in conflict with a
transform's validity region). The CLI maps the former to exit code 2 and
the latter to exit code 3.
"""


class AlphaHyperError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(AlphaHyperError, ValueError):
    """Argument outside the domain of validity of an operation."""


class PoleError(DomainError):
    """Evaluation requested at a pole of the underlying function."""


class StripError(DomainError):
    """Mellin variable outside the admissible strip."""


class NumericalError(AlphaHyperError, RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""


class NonConvergenceError(NumericalError):
    """A series or iteration exceeded its term budget without converging."""


class ContourError(NumericalError):
    """Inversion contour incompatible with the transform's validity region."""


class ConfigError(AlphaHyperError, ValueError):
    """Invalid run configuration (CLI / config file)."""
