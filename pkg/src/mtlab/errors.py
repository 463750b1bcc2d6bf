"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: parameter problems are usage errors
(exit 1), quadrature or optimizer nonconvergence is a numerical failure
(exit 3).  Scientific acceptance-rule failures are reported through pass
flags, not exceptions.
"""


class ParameterError(ValueError):
    """An input violates the admissible parameter regime."""


class SupercriticalError(ParameterError):
    """A search was requested at or above the critical exponential coefficient,
    where the supremum is infinite and ascent would only chase the divergence."""


class FinitenessError(ParameterError):
    """A supremum known to be infinite for these parameters was requested."""


class ZeroDenominatorError(ValueError):
    """A ratio functional was evaluated on a profile with vanishing norm."""


class NonconvergentError(RuntimeError):
    """Adaptive refinement failed to reach the requested tolerance."""
