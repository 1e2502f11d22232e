"""Exception hierarchy shared by all fanolab modules.

Two families exist so the CLI can map them onto exit codes:
:class:`ConfigError` (bad parameters, bad files; exit 2) and
:class:`FanoDomainError` (a valid request the mathematics cannot satisfy; exit 1).
"""


class FanoError(Exception):
    """Base class for every error raised by fanolab."""


class ConfigError(FanoError, ValueError):
    """Invalid configuration: parameters, simulation settings or output paths."""


class NonPositiveRate(ConfigError):
    pass


class InvalidSiteIndex(ConfigError):
    pass


class EmptySweep(ConfigError):
    pass


class GridMismatch(ConfigError):
    pass


class FanoDomainError(FanoError, ValueError):
    """A request outside the mathematical domain of an operation."""


class DomainError(FanoDomainError):
    pass


class BandEdgeSingularity(DomainError):
    pass


class BandEdge(DomainError):
    pass


class OnBranchCut(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class ResonanceMismatch(DomainError):
    pass


class NoBic(DomainError):
    pass


class OutsideBoundStatePresent(DomainError):
    pass


class NumericalFailure(FanoDomainError, ArithmeticError):
    """An iterative numerical procedure did not meet its tolerance."""


class NoConvergence(NumericalFailure):
    pass


class NonFiniteIntegrand(NumericalFailure):
    pass


class PoleAtEndpoint(DomainError):
    pass


class RootFindFailure(NumericalFailure):
    pass


class StepSizeUnderflow(NumericalFailure):
    pass


class ResidueResolutionError(NumericalFailure):
    """The lattice plateau matched neither or both residue candidates."""
