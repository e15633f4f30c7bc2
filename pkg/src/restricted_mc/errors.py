"""Error kinds raised by the laboratory.

All domain errors derive from ``ValueError`` so that callers (and the CLI)
can treat them like any other invalid-input condition.
"""


class MalformedTranscript(ValueError):
    """A transcript entry's answer tag does not match its query kind."""


class MalformedStrategy(ValueError):
    """A strategy returned something that is not a valid action or query."""


class NonterminatingPath(ValueError):
    """A branch did not stop within the allowed number of calls."""


class InsufficientSamples(ValueError):
    """Sampled estimation was requested with fewer than two samples."""


class CapsViolated(ValueError):
    """A strategy exceeded its hard cardinality caps on some branch."""


class BudgetViolated(ValueError):
    """A strategy exceeded its expected cardinality budgets on some input."""


class LengthMismatch(ValueError):
    """Parallel sequences (trees and weights) differ in length."""


class SizeTooLarge(ValueError):
    """A finite problem is too large to enumerate."""


class BadDistribution(ValueError):
    """A probability vector is negative, mis-sized or does not sum to one."""


class BadParams(ValueError):
    """Parameters of a bound calculator or family member are invalid."""


class UnknownName(ValueError):
    """A name did not resolve to a registered built-in."""


class UnknownFamily(UnknownName):
    """A Lipschitz family spec names an unknown generator."""


class UnknownSuite(UnknownName):
    """A verification suite name is unknown."""


class UnknownStrategy(UnknownName):
    """A built-in strategy name is unknown."""


class UnknownBound(UnknownName):
    """A bound calculator name is unknown."""


class CardinalityOverflow(OverflowError):
    """An inflated cardinality exceeds the representable range."""
