"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so library code should
raise these rather than bare ValueError whenever the condition is one a
caller can meaningfully dispatch on.
"""


class TandemError(Exception):
    """Base class for all package-specific errors."""


class UnstableRatesError(TandemError):
    """Raised when an operation requires lambda < mu_i for every station."""


class EqualRatesError(TandemError):
    """Raised when a formula needs pairwise-distinct service rates.

    The two-station case has a dedicated limit formula; callers that can
    route should catch this and use it.
    """


class ZeroBetaError(TandemError):
    """The characteristic polynomial is singular at beta = 0 (or alpha = 0)."""


class DegenerateDiscriminantError(TandemError):
    """The root pair collapses: the quadratic discriminant is (numerically) zero."""


class NotConvergedError(TandemError):
    """Iterative solve hit its sweep budget; carries the last residual."""

    def __init__(self, sweeps: int, residual: float):
        super().__init__(
            f"no convergence after {sweeps} sweeps (last residual {residual:.3e})"
        )
        self.sweeps = sweeps
        self.residual = residual


class RankDeficientBasisError(TandemError):
    """Least-squares basis matrix has deficient numerical rank."""


class InadmissibleBasisElementError(TandemError):
    """A basis element violates the modulus conditions |beta| < 1, |alpha_i| <= 1."""

    def __init__(self, beta: complex, reason: str):
        super().__init__(f"basis element beta={beta!r} rejected: {reason}")
        self.beta = beta
        self.reason = reason
