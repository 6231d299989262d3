"""Exception hierarchy for convlab.

Every failure mode that callers are expected to handle gets its own class so
scenario runners and the CLI can map outcomes to exit codes without string
matching.  Numerical failures (an integral that refuses to settle, a moment
that genuinely diverges, a Gram matrix too ill-conditioned to invert) are kept
separate from caller mistakes (unknown scenario names, malformed parameters).
"""


class ConvlabError(Exception):
    """Base class for all convlab-specific errors."""


class InvalidParam(ConvlabError):
    """A parameter violates a documented precondition."""


class NonConvergent(ConvlabError):
    """Adaptive quadrature exhausted its subdivision budget."""


class DivergentIntegral(ConvlabError):
    """Tail doubling kept changing the integral: treated as divergent."""


class Unbounded(ConvlabError):
    """A minimization ran downhill into the edge of its search box."""


class OutOfDomain(ConvlabError):
    """A sample point fell outside the domain of the function."""


class PointOutsideDomain(ConvlabError):
    """A distance query was made from a point not in the domain."""


class DiscEscapesDomain(ConvlabError):
    """An analytic disc sample left the ambient domain."""


class ZeroKernel(ConvlabError):
    """The weighted Bergman space contains no nonzero bounded-evaluation element."""


class IllConditioned(ConvlabError):
    """A Gram matrix is numerically singular; refusing to regularize silently."""


class MethodUnavailable(ConvlabError):
    """The requested computation path does not apply to these inputs."""


class UnknownName(ConvlabError):
    """An unrecognized registered-object name (weight, scenario, ...)."""


class UnknownScenario(UnknownName):
    """An unrecognized scenario name."""
